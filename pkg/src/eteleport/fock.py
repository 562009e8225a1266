"""Sparse fermionic Fock-space engine.

States carry a fixed particle number over a registry of named modes.
An occupation configuration is a bit field (bit i = occupation of the
mode at registry index i), amplitudes are stored sparsely, and basis
kets are defined by creating particles in ascending registry-index
order.  Single-particle unitaries lift to the many-body space with
determinant amplitudes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

NORM_TOL = 1e-10
UNITARITY_TOL = 1e-12
PRUNE_TOL = 1e-14


@dataclass(frozen=True)
class ModeRegistry:
    """Ordered, unique mode labels; index order fixes all sign conventions."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate mode labels in {labels}")
        object.__setattr__(self, "_indices", {lab: i for i, lab in enumerate(labels)})

    def index(self, label: str) -> int:
        try:
            return self._indices[label]
        except KeyError:
            raise ValueError(
                f"unknown mode label {label!r}; registry holds {self.labels}"
            ) from None

    def indices(self, labels: Iterable[str]) -> list[int]:
        return [self.index(lab) for lab in labels]

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self._indices

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)


# Canonical registries of the six-mode teleportation setup.  Input order
# alternates sources and grounded inputs; output order lists Alice's four
# detectors then Bob's two.  "p" marks primed modes (A0p reads "A0-prime").
INPUT_MODES = ModeRegistry(("S_phi0", "G_phi0", "S_phi1", "G_phi1", "S_psi", "G_psi"))
OUTPUT_MODES = ModeRegistry(("A0+", "A0-", "A1+", "A1-", "B0", "B1"))
# Same stage as OUTPUT_MODES but with Bob's tomography splitter not yet applied.
DETECTION_MODES = ModeRegistry(("A0+", "A0-", "A1+", "A1-", "B0p", "B1p"))
# Stage after the source splitters only.
PREPARED_MODES = ModeRegistry(("A0p", "A1p", "A0", "A1", "B0p", "B1p"))


def _popcount(config: int) -> int:
    return config.bit_count()


def _bits(config: int, n_modes: int) -> tuple[int, ...]:
    return tuple((config >> i) & 1 for i in range(n_modes))


def _occupied_indices(config: int, n_modes: int) -> tuple[int, ...]:
    return tuple(i for i in range(n_modes) if (config >> i) & 1)


def _reorder_sign(indices: Sequence[int]) -> int:
    """Sign of the permutation that sorts a distinct index sequence ascending."""
    inversions = 0
    for i in range(len(indices)):
        for j in range(i + 1, len(indices)):
            if indices[i] > indices[j]:
                inversions += 1
    return -1 if inversions % 2 else 1


@dataclass(frozen=True, eq=False)
class FockState:
    """Fixed-particle-number state as a sparse map config -> amplitude."""

    registry: ModeRegistry
    particle_number: int
    amplitudes: Mapping[int, complex]

    def __post_init__(self):
        m = len(self.registry)
        for config in self.amplitudes:
            if config < 0 or config >= (1 << m):
                raise ValueError(f"configuration {config:#b} outside {m}-mode space")
            if _popcount(config) != self.particle_number:
                raise ValueError(
                    f"configuration {config:#b} does not hold "
                    f"{self.particle_number} particles"
                )
        object.__setattr__(self, "amplitudes", dict(self.amplitudes))

    @classmethod
    def vacuum(cls, registry: ModeRegistry) -> "FockState":
        return cls(registry, 0, {0: 1.0 + 0.0j})

    @classmethod
    def from_terms(
        cls,
        registry: ModeRegistry,
        terms: Iterable[tuple[complex, Sequence[str]]],
        particle_number: int | None = None,
    ) -> "FockState":
        """Build a state from creation-operator strings acting on the vacuum.

        Each term is (coefficient, labels) with labels in written operator
        order; the anticommutation sign from reordering into ascending
        registry order is applied automatically.  Terms with a repeated
        label vanish.
        """
        amps: dict[int, complex] = {}
        n = particle_number
        for coeff, labels in terms:
            idx = registry.indices(labels)
            if len(set(idx)) != len(idx):
                continue
            if n is None:
                n = len(idx)
            elif len(idx) != n:
                raise ValueError("terms with differing particle numbers")
            config = 0
            for i in idx:
                config |= 1 << i
            amps[config] = amps.get(config, 0.0) + coeff * _reorder_sign(idx)
        if n is None:
            raise ValueError("no terms given")
        amps = {c: a for c, a in amps.items() if abs(a) > PRUNE_TOL}
        return cls(registry, n, amps)

    @property
    def is_empty(self) -> bool:
        return not self.amplitudes

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self) -> "FockState":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize an empty state")
        return FockState(
            self.registry,
            self.particle_number,
            {c: a / n for c, a in self.amplitudes.items()},
        )

    def overlap(self, other: "FockState") -> complex:
        """Inner product <self|other>."""
        if self.registry != other.registry or self.particle_number != other.particle_number:
            raise ValueError("overlap requires matching registries and particle numbers")
        return complex(
            sum(
                complex(self.amplitudes.get(c, 0.0)).conjugate() * a
                for c, a in other.amplitudes.items()
            )
        )

    def amplitude(self, occupied_labels: Iterable[str]) -> complex:
        config = 0
        for i in self.registry.indices(occupied_labels):
            config |= 1 << i
        return complex(self.amplitudes.get(config, 0.0))

    def occupation_distribution(
        self, labels: Sequence[str]
    ) -> dict[tuple[int, ...], float]:
        """Joint probability of occupations on the given modes."""
        idx = self.registry.indices(labels)
        dist: dict[tuple[int, ...], float] = {}
        for config, amp in self.amplitudes.items():
            key = tuple((config >> i) & 1 for i in idx)
            dist[key] = dist.get(key, 0.0) + float(abs(amp) ** 2)
        return dist


@dataclass(frozen=True, eq=False)
class SingleParticleUnitary:
    """M x M unitary with named output (rows) and input (cols) modes."""

    matrix: np.ndarray
    rows: ModeRegistry
    cols: ModeRegistry

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.shape != (len(self.rows), len(self.cols)) or len(self.rows) != len(self.cols):
            raise ValueError(f"matrix shape {m.shape} does not match the registries")
        defect = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if defect > UNITARITY_TOL:
            raise ValueError(f"matrix is not unitary (defect {defect:.3e})")

    @classmethod
    def identity(cls, registry: ModeRegistry) -> "SingleParticleUnitary":
        return cls(np.eye(len(registry), dtype=complex), registry, registry)

    def __matmul__(self, other: "SingleParticleUnitary") -> "SingleParticleUnitary":
        if self.cols != other.rows:
            raise ValueError("registry mismatch in composition")
        return SingleParticleUnitary(self.matrix @ other.matrix, self.rows, other.cols)


def create_sources(registry: ModeRegistry, occupied_labels: Sequence[str]) -> FockState:
    """Product state with one particle in each listed mode, amplitude +1.

    The sign convention is fixed by creating particles in ascending
    registry-index order, so the amplitude is exactly 1 regardless of the
    order in which labels are listed.
    """
    idx = registry.indices(occupied_labels)
    if len(set(idx)) != len(idx):
        raise ValueError(f"duplicate source labels in {tuple(occupied_labels)}")
    config = 0
    for i in idx:
        config |= 1 << i
    return FockState(registry, len(idx), {config: 1.0 + 0.0j})


def lift_apply(u: SingleParticleUnitary, state: FockState) -> FockState:
    """Evolve a state by the second-quantized lift of a single-particle unitary.

    The amplitude sent to an output configuration O from an input
    configuration I is det(u[rows=O, cols=I]) with both index sets sorted
    ascending, which is the free-fermion (Slater determinant) rule.
    Particle number and norm are preserved.
    """
    if u.cols != state.registry:
        raise ValueError("unitary input registry does not match the state registry")
    n = state.particle_number
    m = len(u.cols)
    combos = list(itertools.combinations(range(m), n))
    rows = np.array(combos, dtype=int).reshape(len(combos), n)
    out = np.zeros(len(combos), dtype=complex)
    for config, amp in state.amplitudes.items():
        col_idx = list(_occupied_indices(config, m))
        sub = u.matrix[:, col_idx][rows]
        out += np.linalg.det(sub) * amp
    amps: dict[int, complex] = {}
    for combo, a in zip(combos, out):
        if abs(a) > PRUNE_TOL:
            config = 0
            for i in combo:
                config |= 1 << i
            amps[config] = a
    result = FockState(u.rows, n, amps)
    if abs(result.norm() - state.norm()) > NORM_TOL:
        raise ValueError("lifted evolution failed to preserve the norm")
    return result


def lift_matrix(
    u: SingleParticleUnitary, particle_number: int
) -> tuple[list[int], np.ndarray]:
    """Dense lift of a unitary onto the fixed-particle-number config basis.

    Returns the configuration list (bit fields, combination order) shared
    by rows and columns, and the matrix L with
    L[out, in] = det(u[rows=out, cols=in]).
    """
    m = len(u.cols)
    combos = list(itertools.combinations(range(m), particle_number))
    configs = []
    for combo in combos:
        c = 0
        for i in combo:
            c |= 1 << i
        configs.append(c)
    dim = len(combos)
    rows = np.array(combos, dtype=int).reshape(dim, particle_number)
    mat = np.empty((dim, dim), dtype=complex)
    for j, combo in enumerate(combos):
        sub = u.matrix[:, list(combo)][rows]
        mat[:, j] = np.linalg.det(sub)
    return configs, mat


def project_number(state: FockState, mode_label: str, n: int) -> tuple[float, FockState]:
    """Projective measurement of one mode's occupation.

    Returns (probability of outcome n, renormalized post-measurement
    state).  Probability zero yields an empty state.
    """
    if n not in (0, 1):
        raise ValueError(f"occupation outcome must be 0 or 1, got {n}")
    i = state.registry.index(mode_label)
    kept = {c: a for c, a in state.amplitudes.items() if (c >> i) & 1 == n}
    p = sum(abs(a) ** 2 for a in kept.values())
    if p == 0.0:
        return 0.0, FockState(state.registry, state.particle_number, {})
    scale = 1.0 / math.sqrt(p)
    post = FockState(
        state.registry, state.particle_number, {c: a * scale for c, a in kept.items()}
    )
    return p, post


def occupation_moments(state: FockState, labels: Sequence[str]) -> float:
    """Mean (1 label) or central occupation moment (2 or 3 labels).

    Occupations are jointly diagonal in the configuration basis, so the
    moments are those of the classical distribution |amplitude|^2;
    the result is exact (no sampling).  Repeated labels are rejected
    because powers of an occupation obey a different cumulant algebra.
    """
    if not 1 <= len(labels) <= 3:
        raise ValueError("occupation_moments takes 1 to 3 mode labels")
    if len(set(labels)) != len(labels):
        raise ValueError(f"repeated mode label in {tuple(labels)}")
    idx = state.registry.indices(labels)
    configs = list(state.amplitudes)
    probs = np.array([abs(state.amplitudes[c]) ** 2 for c in configs])
    occ = np.array([[(c >> i) & 1 for c in configs] for i in idx], dtype=float)
    means = occ @ probs
    if len(labels) == 1:
        return float(means[0])
    centered = occ - means[:, None]
    return float(np.prod(centered, axis=0) @ probs)


def occupation_product_mean(state: FockState, labels: Sequence[str]) -> float:
    """Exact expectation of a product of occupation numbers, <N_a N_b ...>."""
    if len(set(labels)) != len(labels):
        raise ValueError(f"repeated mode label in {tuple(labels)}")
    idx = state.registry.indices(labels)
    total = 0.0
    for config, amp in state.amplitudes.items():
        if all((config >> i) & 1 for i in idx):
            total += abs(amp) ** 2
    return float(total)
