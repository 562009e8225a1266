"""Ideal teleportation run: preparation, detection, conditioning, tomography.

Three electrons enter the six-mode network; Alice's four detectors click,
and conditioning on one click per detector pair leaves Bob with a
dual-rail qubit in the (B'0, B'1) basis.  All probabilities and
conditional states are computed exactly from the Fock simulation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Mapping, Union

import numpy as np

from . import circuit
from .fock import (
    DETECTION_MODES,
    INPUT_MODES,
    PREPARED_MODES,
    FockState,
    ModeRegistry,
    SingleParticleUnitary,
    create_sources,
    lift_apply,
    lift_matrix,
    occupation_product_mean,
)

SOURCE_LABELS = ("S_phi0", "S_phi1", "S_psi")
DETECTOR_LABELS = ("A0+", "A0-", "A1+", "A1-")

# Tomography axis -> (D', theta) of Bob's splitter.
TOMO_SETTINGS = {
    "X": (0.5, math.pi / 2.0),
    "Y": (0.5, 0.0),
    "Z": (1.0, 0.0),
}


@dataclass(frozen=True)
class TeleportParams:
    """Input-qubit preparation (R, phi) and Bob's tomography axis."""

    R: float
    phi: float
    setting: str = "Z"

    def __post_init__(self):
        if not 0.0 <= self.R <= 1.0:
            raise ValueError(f"reflection probability R must lie in [0, 1], got {self.R}")
        if self.setting not in TOMO_SETTINGS:
            raise ValueError(f"tomography setting must be one of {sorted(TOMO_SETTINGS)}")

    @property
    def D(self) -> float:
        return 1.0 - self.R

    @property
    def tomo_transmission(self) -> float:
        return TOMO_SETTINGS[self.setting][0]

    @property
    def tomo_theta(self) -> float:
        return TOMO_SETTINGS[self.setting][1]


@dataclass(frozen=True)
class MeasurementOutcome:
    """Click pattern (j_A0+, j_A0-, j_A1+, j_A1-) of Alice's four detectors."""

    bits: tuple[int, int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if len(self.bits) != 4 or any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"outcome bits must be four 0/1 values, got {self.bits}")

    @classmethod
    def from_signs(cls, s0: str, s1: str) -> "MeasurementOutcome":
        """One click per detector pair: s_j says which A_j detector fired."""
        signs = {"+": (1, 0), "-": (0, 1)}
        if s0 not in signs or s1 not in signs:
            raise ValueError("signs must be '+' or '-'")
        return cls(signs[s0] + signs[s1])

    @property
    def is_paired(self) -> bool:
        """True when exactly one detector per pair clicked (teleporting pattern)."""
        b = self.bits
        return b[0] + b[1] == 1 and b[2] + b[3] == 1

    @property
    def label(self) -> str:
        if self.is_paired:
            return ("+" if self.bits[0] else "-") + ("+" if self.bits[2] else "-")
        return "".join(str(b) for b in self.bits)


ALL_OUTCOMES = tuple(
    MeasurementOutcome(bits) for bits in itertools.product((0, 1), repeat=4)
)
PAIRED_OUTCOMES = tuple(
    MeasurementOutcome.from_signs(s0, s1) for s0 in "+-" for s1 in "+-"
)
# Outcomes that keep the input state without correction vs. those needing
# the sigma_z feed-forward.
UNCORRECTED_OUTCOMES = (
    MeasurementOutcome.from_signs("+", "+"),
    MeasurementOutcome.from_signs("-", "-"),
)
CORRECTED_OUTCOMES = (
    MeasurementOutcome.from_signs("+", "-"),
    MeasurementOutcome.from_signs("-", "+"),
)

_SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True, eq=False)
class QubitState:
    """Bob's 2x2 density matrix in the (B'0 occupied, B'1 occupied) basis."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        object.__setattr__(self, "rho", rho)
        if rho.shape != (2, 2):
            raise ValueError("density matrix must be 2x2")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > 1e-12:
            raise ValueError("density matrix trace differs from 1")
        if np.min(np.linalg.eigvalsh(rho)) < -1e-12:
            raise ValueError("density matrix has a negative eigenvalue")
        if np.linalg.norm(self.bloch) > 1.0 + 1e-10:
            raise ValueError("Bloch vector leaves the unit ball")

    @classmethod
    def from_pure(cls, c0: complex, c1: complex) -> "QubitState":
        v = np.array([c0, c1], dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @property
    def bloch(self) -> np.ndarray:
        r = self.rho
        return np.array(
            [
                2.0 * r[0, 1].real,
                -2.0 * r[0, 1].imag,
                (r[0, 0] - r[1, 1]).real,
            ]
        )


@dataclass(frozen=True)
class NonQubitReport:
    """Conditioning result when Bob is not left with a dual-rail qubit.

    `occupations` maps Bob's joint (n_B'0, n_B'1) occupation to its
    conditional probability.
    """

    outcome: MeasurementOutcome
    probability: float
    occupations: dict[tuple[int, int], float]


def input_qubit(params: TeleportParams) -> QubitState:
    """The dual-rail qubit Alice is handed, as prepared by her splitter."""
    return QubitState.from_pure(
        1j * math.sqrt(params.R) * np.exp(-1j * params.phi), math.sqrt(params.D)
    )


def input_bloch(params: TeleportParams) -> np.ndarray:
    """Closed-form Bloch vector of the prepared input qubit."""
    root = 2.0 * math.sqrt(params.R * params.D)
    return np.array(
        [root * math.sin(params.phi), -root * math.cos(params.phi), params.R - params.D]
    )


def run_premeasurement(params: TeleportParams, stage: str = "detection") -> FockState:
    """Evolve the three-source state up to the requested stage.

    stage "detection": Alice's detectors resolved, Bob's modes still
    (B'0, B'1).  stage "tomography": Bob's splitter applied with the
    params' setting, modes (B0, B1).
    """
    sources = create_sources(INPUT_MODES, SOURCE_LABELS)
    if stage == "detection":
        network = circuit.detection_network(params.R, params.phi)
    elif stage == "tomography":
        network = circuit.builtin_teleport_network(
            params.R, params.phi, params.tomo_transmission, params.tomo_theta
        )
    else:
        raise ValueError(f"stage must be 'detection' or 'tomography', got {stage!r}")
    return lift_apply(network, sources)


@dataclass(frozen=True)
class POVMElement:
    """Diagonal projector weighting configurations by Alice's click pattern."""

    outcome: MeasurementOutcome

    def weight(self, config: int, registry: ModeRegistry) -> float:
        for label, j in zip(DETECTOR_LABELS, self.outcome.bits):
            if (config >> registry.index(label)) & 1 != j:
                return 0.0
        return 1.0

    def expectation(self, state: FockState) -> float:
        idx = state.registry.indices(DETECTOR_LABELS)
        total = 0.0
        for config, amp in state.amplitudes.items():
            if all((config >> i) & 1 == j for i, j in zip(idx, self.outcome.bits)):
                total += abs(amp) ** 2
        return float(total)

    def condition(self, state: FockState) -> tuple[float, FockState]:
        """Outcome probability and the renormalized conditional state."""
        idx = state.registry.indices(DETECTOR_LABELS)
        kept = {
            config: amp
            for config, amp in state.amplitudes.items()
            if all((config >> i) & 1 == j for i, j in zip(idx, self.outcome.bits))
        }
        p = float(sum(abs(a) ** 2 for a in kept.values()))
        if p == 0.0:
            return 0.0, FockState(state.registry, state.particle_number, {})
        s = 1.0 / math.sqrt(p)
        return p, FockState(
            state.registry, state.particle_number, {c: a * s for c, a in kept.items()}
        )


def povm_element(outcome: MeasurementOutcome) -> POVMElement:
    return POVMElement(outcome)


def povm_completeness_defect(
    registry: ModeRegistry = DETECTION_MODES, particle_number: int = 3
) -> float:
    """Max deviation of sum_X E(X) from the identity on the given sector."""
    worst = 0.0
    for combo in itertools.combinations(range(len(registry)), particle_number):
        config = 0
        for i in combo:
            config |= 1 << i
        total = sum(
            povm_element(x).weight(config, registry) for x in ALL_OUTCOMES
        )
        worst = max(worst, abs(total - 1.0))
    return worst


def outcome_probability(params: TeleportParams, outcome: MeasurementOutcome) -> float:
    state = run_premeasurement(params, "detection")
    return povm_element(outcome).expectation(state)


def _click_labels(outcome: MeasurementOutcome) -> tuple[str, ...]:
    return tuple(label for label, j in zip(DETECTOR_LABELS, outcome.bits) if j == 1)


def _conditional_from_state(
    state: FockState, outcome: MeasurementOutcome
) -> tuple[float, Union[QubitState, NonQubitReport]]:
    p, conditional = povm_element(outcome).condition(state)
    if p == 0.0:
        raise ValueError(f"outcome {outcome.label} has probability zero")
    if outcome.is_paired:
        clicks = _click_labels(outcome)
        c0 = conditional.amplitude(clicks + ("B0p",))
        c1 = conditional.amplitude(clicks + ("B1p",))
        return p, QubitState.from_pure(c0, c1)
    occupations = conditional.occupation_distribution(("B0p", "B1p"))
    return p, NonQubitReport(outcome, p, occupations)


def bob_conditional(
    params: TeleportParams, outcome: MeasurementOutcome
) -> Union[QubitState, NonQubitReport]:
    """Bob's state conditioned on Alice's click pattern.

    The four one-click-per-pair outcomes leave Bob with a pure dual-rail
    qubit; every other pattern yields a NonQubitReport carrying Bob's
    conditional occupation distribution.
    """
    state = run_premeasurement(params, "detection")
    return _conditional_from_state(state, outcome)[1]


def conditional_with_arm_phases(
    params: TeleportParams, arm_phases: Mapping[str, float]
) -> tuple[float, QubitState]:
    """Probability and Bob's qubit for the ++ outcome with fixed arm phases."""
    sources = create_sources(INPUT_MODES, SOURCE_LABELS)
    network = circuit.detection_network(params.R, params.phi, arm_phases=arm_phases)
    state = lift_apply(network, sources)
    p, result = _conditional_from_state(state, MeasurementOutcome.from_signs("+", "+"))
    return p, result


def apply_feedforward(state: QubitState, outcome: MeasurementOutcome) -> QubitState:
    """Conditionally apply the sigma_z correction announced by Alice."""
    if outcome in CORRECTED_OUTCOMES:
        return QubitState(_SIGMA_Z @ state.rho @ _SIGMA_Z)
    return state


def efficiency(with_feedforward: bool, params: TeleportParams | None = None) -> float:
    """Probability mass of the outcomes that teleport, computed from the run."""
    params = params or TeleportParams(0.5, 0.0)
    state = run_premeasurement(params, "detection")
    outcomes = PAIRED_OUTCOMES if with_feedforward else UNCORRECTED_OUTCOMES
    return float(sum(povm_element(x).expectation(state) for x in outcomes))


def tomography_bloch(params: TeleportParams) -> np.ndarray:
    """Reconstruct Bob's ++-conditional Bloch vector from occupation averages.

    Each component divides <N_A0+ N_A1+ (N_B0 - N_B1)> at the matching
    tomography setting by <N_A0+ N_A1+ (1 - N_A0- - N_A1-)>, both exact
    expectations on the pre-measurement state.
    """
    components = []
    for axis in ("X", "Y", "Z"):
        state = run_premeasurement(replace(params, setting=axis), "tomography")
        numerator = occupation_product_mean(
            state, ("A0+", "A1+", "B0")
        ) - occupation_product_mean(state, ("A0+", "A1+", "B1"))
        denominator = (
            occupation_product_mean(state, ("A0+", "A1+"))
            - occupation_product_mean(state, ("A0+", "A1+", "A0-"))
            - occupation_product_mean(state, ("A0+", "A1+", "A1-"))
        )
        if denominator <= 0.0:
            raise ValueError("tomography denominator vanished")
        components.append(numerator / denominator)
    return np.array(components)


# ---------------------------------------------------------------------------
# Structural states and dual-rail checks
# ---------------------------------------------------------------------------

def _input_amplitudes(params: TeleportParams) -> tuple[complex, complex]:
    return (
        1j * math.sqrt(params.R) * np.exp(-1j * params.phi),
        complex(math.sqrt(params.D)),
    )


def teleporting_branch(params: TeleportParams) -> FockState:
    """Normalized component of the pre-measurement state that teleports."""
    a, b = _input_amplitudes(params)
    half = 0.5
    terms = []
    for pair, pair_sign in ((("A0+", "A1+"), 1.0), (("A0-", "A1-"), 1.0)):
        terms.append((half * pair_sign * a, pair + ("B0p",)))
        terms.append((half * pair_sign * b, pair + ("B1p",)))
    for pair, pair_sign in ((("A0+", "A1-"), -1j), (("A0-", "A1+"), 1j)):
        terms.append((half * pair_sign * a, pair + ("B0p",)))
        terms.append((half * pair_sign * (-b), pair + ("B1p",)))
    return FockState.from_terms(DETECTION_MODES, terms)


def failing_branch(params: TeleportParams) -> FockState:
    """Normalized component orthogonal to the teleporting branch."""
    a, b = _input_amplitudes(params)
    s2 = math.sqrt(2.0)
    terms = [
        (-a / s2 * 1j, ("A0+", "A0-", "A1+")),
        (-a / s2, ("A0+", "A0-", "A1-")),
        (b / s2 * 1j, ("A0+", "A1+", "A1-")),
        (b / s2, ("A0-", "A1+", "A1-")),
        (a / s2, ("A0+", "B0p", "B1p")),
        (a / s2 * 1j, ("A0-", "B0p", "B1p")),
        (b / s2, ("A1+", "B0p", "B1p")),
        (b / s2 * 1j, ("A1-", "B0p", "B1p")),
        (1j * a, ("A0+", "A0-", "B1p")),
        (-1j * b, ("A1+", "A1-", "B0p")),
    ]
    scaled = [(c / math.sqrt(3.0), labels) for c, labels in terms]
    return FockState.from_terms(DETECTION_MODES, scaled)


def bell_states(
    registry: ModeRegistry, pair_a: tuple[str, str], pair_b: tuple[str, str]
) -> dict[str, FockState]:
    """The four two-particle Bell states over two dual-rail pairs."""
    a0, a1 = pair_a
    b0, b1 = pair_b
    s = 1.0 / math.sqrt(2.0)
    return {
        "psi+": FockState.from_terms(registry, [(s, (a0, b1)), (s, (a1, b0))]),
        "psi-": FockState.from_terms(registry, [(s, (a0, b1)), (-s, (a1, b0))]),
        "phi+": FockState.from_terms(registry, [(s, (a0, b0)), (s, (a1, b1))]),
        "phi-": FockState.from_terms(registry, [(s, (a0, b0)), (-s, (a1, b1))]),
    }


def bell_decomposition_terms(params: TeleportParams) -> dict[str, FockState]:
    """The four products (Bell state at A'A) x (corrected qubit at B').

    Keys name the correction Bob would apply: identity, sigma_z, sigma_x,
    i_sigma_y.
    """
    a, b = _input_amplitudes(params)
    s = 1.0 / math.sqrt(2.0)

    def build(first, second, sign, q0, q1):
        return FockState.from_terms(
            PREPARED_MODES,
            [
                (s * q0, first + ("B0p",)),
                (s * q1, first + ("B1p",)),
                (sign * s * q0, second + ("B0p",)),
                (sign * s * q1, second + ("B1p",)),
            ],
        )

    return {
        "identity": build(("A0p", "A1"), ("A1p", "A0"), -1.0, a, b),
        "sigma_z": build(("A0p", "A1"), ("A1p", "A0"), 1.0, a, -b),
        "sigma_x": build(("A0p", "A0"), ("A1p", "A1"), 1.0, b, a),
        "i_sigma_y": build(("A0p", "A0"), ("A1p", "A1"), -1.0, b, -a),
    }


def dual_rail_weight(state: FockState) -> float:
    """Probability that each dual-rail pair of the prepared stage holds one particle."""
    pairs = (("A0p", "A1p"), ("A0", "A1"), ("B0p", "B1p"))
    idx_pairs = [state.registry.indices(pair) for pair in pairs]
    total = 0.0
    for config, amp in state.amplitudes.items():
        if all(((config >> i) & 1) + ((config >> j) & 1) == 1 for i, j in idx_pairs):
            total += abs(amp) ** 2
    return total


def _povm_in_prepared_basis() -> tuple[list[int], dict[str, np.ndarray], np.ndarray]:
    """Alice's POVM elements conjugated back through her splitters.

    Works in the two-particle space of (A0p, A1p, A0, A1); returns the
    config basis, the matrices for the six one-sided and paired click
    patterns, and the projector onto the dual-rail (Bell) subspace.
    """
    registry = ModeRegistry(("A0p", "A1p", "A0", "A1"))
    block = circuit.element_matrix(circuit.sym_splitter("x", "y"))
    v = np.eye(4, dtype=complex)
    # splitter inputs are ordered (unprimed, primed); outputs land on
    # (A_j+, A_j-) = (unprimed wire, primed wire)
    for unprimed, primed in ((2, 0), (3, 1)):
        e = np.eye(4, dtype=complex)
        e[unprimed, unprimed] = block[0, 0]
        e[unprimed, primed] = block[0, 1]
        e[primed, unprimed] = block[1, 0]
        e[primed, primed] = block[1, 1]
        v = e @ v
    out_registry = ModeRegistry(("A0-", "A1-", "A0+", "A1+"))
    lifted_configs, lifted = lift_matrix(
        SingleParticleUnitary(v, out_registry, registry), 2
    )
    elements: dict[str, np.ndarray] = {}
    patterns = {
        "1010": (1, 0, 1, 0),
        "0101": (0, 1, 0, 1),
        "1001": (1, 0, 0, 1),
        "0110": (0, 1, 1, 0),
        "1100": (1, 1, 0, 0),
        "0011": (0, 0, 1, 1),
    }
    for name, bits in patterns.items():
        weights = []
        for config in lifted_configs:
            ok = all(
                (config >> out_registry.index(label)) & 1 == j
                for label, j in zip(DETECTOR_LABELS, bits)
            )
            weights.append(1.0 if ok else 0.0)
        w = np.diag(weights)
        elements[name] = lifted.conj().T @ w @ lifted
    bells = bell_states(registry, ("A0p", "A1p"), ("A0", "A1"))
    basis = np.zeros((len(lifted_configs), 4), dtype=complex)
    for k, state in enumerate(bells.values()):
        for config, amp in state.amplitudes.items():
            basis[lifted_configs.index(config), k] = amp
    projector = basis @ basis.conj().T
    return lifted_configs, elements, projector


def _sector_weight(state: FockState, crossed: bool) -> float:
    """Weight of the dual-rail configurations with the A' and A particles
    on opposite rails (crossed) or the same rail (aligned)."""
    reg = state.registry
    a0p, a1p, a0, a1 = reg.indices(("A0p", "A1p", "A0", "A1"))
    b0, b1 = reg.indices(("B0p", "B1p"))
    total = 0.0
    for config, amp in state.amplitudes.items():
        bits = [(config >> i) & 1 for i in (a0p, a1p, a0, a1, b0, b1)]
        if bits[0] + bits[1] != 1 or bits[2] + bits[3] != 1 or bits[4] + bits[5] != 1:
            continue
        is_crossed = bits[0] != bits[2]
        if is_crossed == crossed:
            total += abs(amp) ** 2
    return total


def drq_projection_checks(params: TeleportParams | None = None) -> dict[str, float]:
    """Structural checks of the dual-rail decomposition and Alice's POVM.

    Expected values: dual_rail_weight = 1/2, split evenly between the
    crossed and aligned Bell sectors; overlap moduli 1/(2*sqrt(2)) for
    the crossed-sector decomposition terms; vanishing deviations for the
    Bell Gram matrix and the projected POVM identities.  The literal
    aligned-sector product states pick up occupation-ordering signs, so
    their overlap moduli come out |R - D|/(2*sqrt(2)) and are reported
    under explicit names rather than asserted equal to the crossed ones.
    """
    params = params or TeleportParams(0.3, 1.2)
    sources = create_sources(INPUT_MODES, SOURCE_LABELS)
    prepared = lift_apply(circuit.preparation_network(params.R, params.phi), sources)

    report: dict[str, float] = {}
    report["dual_rail_weight"] = dual_rail_weight(prepared)
    report["crossed_sector_weight"] = _sector_weight(prepared, crossed=True)
    report["aligned_sector_weight"] = _sector_weight(prepared, crossed=False)

    bells = bell_states(
        ModeRegistry(("A0", "A1", "B0p", "B1p")), ("A0", "A1"), ("B0p", "B1p")
    )
    names = list(bells)
    gram_dev = 0.0
    for i, ni in enumerate(names):
        for j, nj in enumerate(names):
            g = bells[ni].overlap(bells[nj])
            gram_dev = max(gram_dev, abs(g - (1.0 if i == j else 0.0)))
    report["bell_gram_max_dev"] = gram_dev

    terms = bell_decomposition_terms(params)
    report["overlap_modulus_identity"] = abs(terms["identity"].overlap(prepared))
    report["overlap_modulus_sigma_z"] = abs(terms["sigma_z"].overlap(prepared))
    report["overlap_modulus_sigma_x_literal"] = abs(terms["sigma_x"].overlap(prepared))
    report["overlap_modulus_i_sigma_y_literal"] = abs(
        terms["i_sigma_y"].overlap(prepared)
    )

    configs, elements, projector = _povm_in_prepared_basis()
    registry = ModeRegistry(("A0p", "A1p", "A0", "A1"))
    bells_aa = bell_states(registry, ("A0p", "A1p"), ("A0", "A1"))

    def vec(state: FockState) -> np.ndarray:
        v = np.zeros(len(configs), dtype=complex)
        for config, amp in state.amplitudes.items():
            v[configs.index(config)] = amp
        return v

    psi_m, psi_p = vec(bells_aa["psi-"]), vec(bells_aa["psi+"])
    phi_sum = vec(bells_aa["phi+"]) + vec(bells_aa["phi-"])
    phi_diff = vec(bells_aa["phi+"]) - vec(bells_aa["phi-"])
    targets = {
        "1010": 0.5 * np.outer(psi_m, psi_m.conj()),
        "0101": 0.5 * np.outer(psi_m, psi_m.conj()),
        "1001": 0.5 * np.outer(psi_p, psi_p.conj()),
        "0110": 0.5 * np.outer(psi_p, psi_p.conj()),
        "1100": 0.5 * np.outer(phi_sum, phi_sum.conj()),
        "0011": 0.5 * np.outer(phi_diff, phi_diff.conj()),
    }
    dev = 0.0
    for name, element in elements.items():
        projected = projector @ element @ projector
        dev = max(dev, float(np.max(np.abs(projected - targets[name]))))
    report["povm_dual_rail_max_dev"] = dev
    return report
