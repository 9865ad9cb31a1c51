"""State diagnostics: overlaps, qubit reduction, entanglement and cat
structure checks.

Fidelities are squared overlaps |<a|b>|^2 and therefore blind to global
phases, matching how the protocol targets are defined.  Everything here is
a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError
from .hilbert import FieldState, PureState, coherent_amplitudes
from .propagate import DensityMatrix

__all__ = [
    "TwoQubitState",
    "fidelity",
    "fidelity_to_pure",
    "reduce_to_qubits",
    "concurrence",
    "reduced_atom_purity",
    "cat_parity_overlap",
    "cavity_marginal",
]


@dataclass(frozen=True)
class TwoQubitState:
    """Amplitudes over the {|0>,|1>} Fock subspace of both cavities.

    Ordering is (|00>, |01>, |10>, |11>) with cavity A first.
    ``embedding_weight`` is the probability mass the original state carried
    inside this subspace before renormalization.
    """

    amplitudes: np.ndarray
    embedding_weight: float

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 4:
            raise DimensionMismatchError("two-qubit state needs exactly 4 amplitudes")
        if not (0.0 <= self.embedding_weight <= 1.0 + 1e-12):
            raise ConfigurationError(f"embedding weight {self.embedding_weight} outside [0, 1]")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)


def fidelity(a, b) -> float:
    """|<a|b>|^2 for two states of the same kind and dimensions."""
    if type(a) is not type(b):
        raise DimensionMismatchError(
            f"fidelity needs two states of the same kind, got {type(a).__name__} "
            f"and {type(b).__name__}"
        )
    if a.dims != b.dims:
        raise DimensionMismatchError(f"dimension mismatch: {a.dims} vs {b.dims}")
    overlap = np.vdot(a.amplitudes, b.amplitudes)
    return float(min(1.0, abs(overlap) ** 2))


def fidelity_to_pure(rho: DensityMatrix, target: PureState) -> float:
    """<target| rho |target>, the standard mixed-vs-pure fidelity."""
    if rho.dims != target.dims:
        raise DimensionMismatchError(f"dimension mismatch: {rho.dims} vs {target.dims}")
    val = float(np.real(np.vdot(target.amplitudes, rho.matrix @ target.amplitudes)))
    return min(1.0, max(0.0, val))


def reduced_atom_purity(state: PureState) -> float:
    """Tr(rho_atom^2) after tracing out both cavities; 1 iff factorized."""
    m = state.reshaped().reshape(2, -1)
    rho = m @ m.conj().T
    rho /= np.trace(rho).real
    return float(np.trace(rho @ rho).real)


def _atom_factor(state: PureState, tol: float = 1e-6) -> FieldState:
    """Strip a factorized atom, leaving the normalized field component."""
    m = state.reshaped().reshape(2, -1)
    rho = m @ m.conj().T
    rho /= np.trace(rho).real
    evals, evecs = np.linalg.eigh(rho)
    if evals[0] > tol:
        raise ConfigurationError(
            f"atom is entangled with the fields (subdominant weight {evals[0]:.3e}); "
            "measure or trace it out first"
        )
    top = evecs[:, 1]
    field = top.conj() @ m
    norm = np.linalg.norm(field)
    return FieldState(state.dims, field / norm)


def reduce_to_qubits(state: PureState | FieldState) -> TwoQubitState:
    """Project onto the two-level subspace of each cavity and renormalize.

    Accepts a field-only state from a measurement branch, or a joint state
    whose atom factorizes (it is then stripped first).
    """
    if isinstance(state, PureState):
        state = _atom_factor(state)
    grid = state.grid()
    block = grid[: min(2, grid.shape[0]), : min(2, grid.shape[1])]
    amps = np.zeros((2, 2), dtype=complex)
    amps[: block.shape[0], : block.shape[1]] = block
    weight = float(np.vdot(amps, amps).real)
    if weight < 1e-12:
        raise ConfigurationError("state has no weight in the two-qubit subspace")
    return TwoQubitState(amps.reshape(-1) / math.sqrt(weight), min(1.0, weight))


def concurrence(q: TwoQubitState) -> float:
    """Wootters concurrence of a pure two-qubit state: 2 |a00 a11 - a01 a10|."""
    a = q.amplitudes
    return float(min(1.0, 2.0 * abs(a[0] * a[3] - a[1] * a[2])))


def cavity_marginal(field_state: FieldState, cavity: str, tol: float = 1e-9) -> np.ndarray:
    """Extract one cavity's pure state from a product two-cavity state.

    Fails if the two cavities are entangled (Schmidt weight beyond ``tol``).
    """
    grid = field_state.grid()
    u, s, vh = np.linalg.svd(grid, full_matrices=False)
    total = float(np.sum(s**2))
    residual = float(np.sum(s[1:] ** 2)) / total if total > 0 else 0.0
    if residual > tol:
        raise ConfigurationError(
            f"cavities are entangled (subdominant Schmidt weight {residual:.3e}); "
            "no single-cavity pure state exists"
        )
    from .hilbert import _cavity_axis

    vec = u[:, 0] if _cavity_axis(cavity) == 0 else vh[0, :].conj()
    return vec / np.linalg.norm(vec)


def cat_parity_overlap(cavity_state, alpha: complex) -> tuple[float, float]:
    """Squared overlaps with the normalized even and odd coherent cats.

    ``cavity_state`` is a single-cavity amplitude vector (use
    :func:`cavity_marginal` to extract one from a product state).  For
    alpha = 0 the odd cat degenerates and its weight is reported as 0.
    """
    vec = np.asarray(cavity_state, dtype=complex).reshape(-1)
    n = vec.size
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise ConfigurationError("cannot analyze the zero vector")
    vec = vec / norm
    plus = coherent_amplitudes(alpha, n)
    minus = coherent_amplitudes(-alpha, n)
    out = []
    for cat in (plus + minus, plus - minus):
        w = float(np.vdot(cat, cat).real)
        if w < 1e-30:
            out.append(0.0)
            continue
        out.append(float(abs(np.vdot(cat / math.sqrt(w), vec)) ** 2))
    return out[0], out[1]
