"""Truncated Hilbert space for one two-level atom and two cavity modes.

The composite basis ordering is fixed once and for all: atom index slowest,
cavity B fastest,

    index(atom, n_A, n_B) = atom * (n_a * n_b) + n_A * n_b + n_B,

with atom = 0 for |g> and 1 for |e>.  The dressed atomic combinations are
|+> = (|g> + |e>)/sqrt(2) and |-> = (|g> - |e>)/sqrt(2).

Cavity raising operators use a hard truncation cut, a_dag|n_max-1> = 0, so
every operator maps the retained levels into themselves and probability that
would leave the cutoff is measurable through :func:`leakage` instead of
silently wrapping around.

All types are immutable after construction and all operations are pure
functions of their inputs, so everything here is safe to use from multiple
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import (
    ConfigurationError,
    DimensionMismatchError,
    TruncationError,
)

__all__ = [
    "SystemDims",
    "PureState",
    "FieldState",
    "Operator",
    "fock_state",
    "coherent_state",
    "coherent_amplitudes",
    "ladder_op",
    "atomic_op",
    "displacement_op",
    "leakage",
    "default_truncation",
    "annihilator_matrix",
    "atomic_matrix",
    "embed_atom_cavity",
    "embed_parts",
    "apply_operator",
    "apply_joint_unitary",
]

ATOM_GROUND = 0
ATOM_EXCITED = 1

_SQRT_HALF = 1.0 / math.sqrt(2.0)

# Amplitudes of the supported atomic labels in the bare {|g>, |e>} basis.
ATOM_AMPLITUDES = {
    "g": np.array([1.0, 0.0], dtype=complex),
    "e": np.array([0.0, 1.0], dtype=complex),
    "plus": np.array([_SQRT_HALF, _SQRT_HALF], dtype=complex),
    "minus": np.array([_SQRT_HALF, -_SQRT_HALF], dtype=complex),
}


def _cavity_axis(cavity: str) -> int:
    """Map a cavity label to its tensor axis (A -> 0, B -> 1)."""
    label = str(cavity).strip().upper()
    if label == "A":
        return 0
    if label == "B":
        return 1
    raise ConfigurationError(f"unknown cavity label {cavity!r} (expected 'A' or 'B')")


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(array, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SystemDims:
    """Fock truncation levels retained for cavities A and B.

    The atom dimension is fixed at 2, so the composite dimension is
    ``2 * n_a * n_b``.  A cavity that undergoes excitation-creating dynamics
    needs at least 2 levels; a pure spectator may be truncated at 1.
    """

    n_a: int
    n_b: int

    def __post_init__(self):
        if int(self.n_a) < 1 or int(self.n_b) < 1:
            raise ConfigurationError(
                f"truncation levels must be >= 1, got n_a={self.n_a}, n_b={self.n_b}"
            )
        object.__setattr__(self, "n_a", int(self.n_a))
        object.__setattr__(self, "n_b", int(self.n_b))

    @property
    def total(self) -> int:
        return 2 * self.n_a * self.n_b

    def cavity_levels(self, cavity: str) -> int:
        return self.n_a if _cavity_axis(cavity) == 0 else self.n_b

    def index(self, atom: int, photon_a: int, photon_b: int) -> int:
        """Flat composite index of the basis label (atom, n_A, n_B)."""
        if atom not in (ATOM_GROUND, ATOM_EXCITED):
            raise ConfigurationError(f"atom index must be 0 or 1, got {atom}")
        if not (0 <= photon_a < self.n_a and 0 <= photon_b < self.n_b):
            raise ConfigurationError(
                f"photon numbers ({photon_a}, {photon_b}) outside truncation "
                f"({self.n_a}, {self.n_b})"
            )
        return atom * (self.n_a * self.n_b) + photon_a * self.n_b + photon_b

    def decode(self, index: int) -> tuple[int, int, int]:
        """Inverse of :meth:`index`."""
        if not (0 <= index < self.total):
            raise ConfigurationError(f"index {index} outside composite dimension {self.total}")
        atom, rest = divmod(index, self.n_a * self.n_b)
        photon_a, photon_b = divmod(rest, self.n_b)
        return atom, photon_a, photon_b


@dataclass(frozen=True)
class PureState:
    """State vector over the composite atom + A + B basis."""

    dims: SystemDims
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(np.asarray(self.amplitudes).reshape(-1))
        if amps.size != self.dims.total:
            raise DimensionMismatchError(
                f"amplitude vector of length {amps.size} does not match "
                f"composite dimension {self.dims.total}"
            )
        object.__setattr__(self, "amplitudes", amps)

    def reshaped(self) -> np.ndarray:
        """View of the amplitudes as a (2, n_a, n_b) tensor."""
        return self.amplitudes.reshape(2, self.dims.n_a, self.dims.n_b)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "PureState":
        n = self.norm()
        if n == 0.0:
            raise ConfigurationError("cannot normalize the zero vector")
        return PureState(self.dims, self.amplitudes / n)

    def overlap(self, other: "PureState") -> complex:
        """Inner product <self|other>."""
        _require_same_dims(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class FieldState:
    """Two-cavity state with the atom measured out, ordered (n_A, n_B)."""

    dims: SystemDims
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(np.asarray(self.amplitudes).reshape(-1))
        if amps.size != self.dims.n_a * self.dims.n_b:
            raise DimensionMismatchError(
                f"field vector of length {amps.size} does not match "
                f"{self.dims.n_a} * {self.dims.n_b}"
            )
        object.__setattr__(self, "amplitudes", amps)

    def grid(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims.n_a, self.dims.n_b)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "FieldState") -> complex:
        _require_same_dims(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class Operator:
    """Dense operator on the composite space, tagged with its dimensions.

    ``hermitian=True`` is assertion metadata: construction fails unless
    max |M - M^dag| < 1e-12 elementwise.
    """

    dims: SystemDims
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        mat = _frozen(np.asarray(self.matrix))
        if mat.shape != (self.dims.total, self.dims.total):
            raise DimensionMismatchError(
                f"matrix shape {mat.shape} does not match composite dimension "
                f"{self.dims.total}"
            )
        if self.hermitian:
            dev = float(np.max(np.abs(mat - mat.conj().T)))
            if dev >= 1e-12:
                raise ConfigurationError(
                    f"operator flagged hermitian deviates by {dev:.3e} from its adjoint"
                )
        object.__setattr__(self, "matrix", mat)

    def dagger(self) -> "Operator":
        return Operator(self.dims, self.matrix.conj().T, hermitian=self.hermitian)


def _require_same_dims(a, b) -> None:
    if a.dims != b.dims:
        raise DimensionMismatchError(f"dimension mismatch: {a.dims} vs {b.dims}")


# ---------------------------------------------------------------------------
# elementary matrices
# ---------------------------------------------------------------------------

def annihilator_matrix(n: int) -> np.ndarray:
    """Truncated annihilation operator, a|k> = sqrt(k)|k-1>."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


_ATOMIC_MATRICES = {
    # sigma = |g><e|, the lowering operator of the bare transition
    "sigma": np.array([[0, 1], [0, 0]], dtype=complex),
    "sigma_dag": np.array([[0, 0], [1, 0]], dtype=complex),
    # projectors onto the dressed states expressed in the bare basis
    "proj_plus": 0.5 * np.array([[1, 1], [1, 1]], dtype=complex),
    "proj_minus": 0.5 * np.array([[1, -1], [-1, 1]], dtype=complex),
    # |+><-| (dressed raising-like flip)
    "flip_pm": 0.5 * np.array([[1, -1], [1, -1]], dtype=complex),
    # |-><+|
    "flip_mp": 0.5 * np.array([[1, 1], [-1, -1]], dtype=complex),
}


def atomic_matrix(kind: str) -> np.ndarray:
    """2x2 atomic operator in the bare basis."""
    try:
        return _ATOMIC_MATRICES[kind].copy()
    except KeyError:
        raise ConfigurationError(
            f"unknown atomic operator {kind!r}; expected one of {sorted(_ATOMIC_MATRICES)}"
        ) from None


def embed_parts(
    dims: SystemDims,
    atom: np.ndarray | None = None,
    cavity_a: np.ndarray | None = None,
    cavity_b: np.ndarray | None = None,
) -> np.ndarray:
    """Tensor the given single-subsystem blocks with identities elsewhere."""
    m_atom = np.eye(2, dtype=complex) if atom is None else np.asarray(atom, dtype=complex)
    m_a = np.eye(dims.n_a, dtype=complex) if cavity_a is None else np.asarray(cavity_a, dtype=complex)
    m_b = np.eye(dims.n_b, dtype=complex) if cavity_b is None else np.asarray(cavity_b, dtype=complex)
    return np.kron(m_atom, np.kron(m_a, m_b))


def embed_atom_cavity(dims: SystemDims, block: np.ndarray, cavity: str) -> np.ndarray:
    """Embed a (2n x 2n) atom-plus-one-cavity block into the composite space."""
    block = np.asarray(block, dtype=complex)
    n = dims.cavity_levels(cavity)
    if block.shape != (2 * n, 2 * n):
        raise DimensionMismatchError(
            f"block shape {block.shape} does not match atom+cavity dimension {2 * n}"
        )
    if _cavity_axis(cavity) == 0:
        # (atom ⊗ A) ⊗ B is contiguous in the composite ordering
        return np.kron(block, np.eye(dims.n_b, dtype=complex))
    m4 = block.reshape(2, n, 2, n)
    out = np.einsum("ibjc,ag->iabjgc", m4, np.eye(dims.n_a, dtype=complex))
    return np.ascontiguousarray(out.reshape(dims.total, dims.total))


def apply_operator(op: Operator, state: PureState) -> PureState:
    """Left-apply an operator; the result is not renormalized."""
    _require_same_dims(op, state)
    return PureState(state.dims, op.matrix @ state.amplitudes)


def apply_joint_unitary(state: PureState, block: np.ndarray, cavity: str) -> PureState:
    """Apply a (2n x 2n) atom-plus-one-cavity map, identity on the spectator.

    Contracting the block directly against the state tensor avoids forming
    the composite-dimension matrix.
    """
    dims = state.dims
    n = dims.cavity_levels(cavity)
    block = np.asarray(block, dtype=complex)
    if block.shape != (2 * n, 2 * n):
        raise DimensionMismatchError(
            f"block shape {block.shape} does not match atom+cavity dimension {2 * n}"
        )
    psi = state.reshaped()
    u4 = block.reshape(2, n, 2, n)
    if _cavity_axis(cavity) == 0:
        out = np.einsum("iajb,jbn->ian", u4, psi)
    else:
        out = np.einsum("ibjc,jac->iab", u4, psi)
    return PureState(dims, out.reshape(-1))


# ---------------------------------------------------------------------------
# canonical states
# ---------------------------------------------------------------------------

def fock_state(dims: SystemDims, atom: str = "g", photon_a: int = 0, photon_b: int = 0) -> PureState:
    """Product state |atom> ⊗ |n_A> ⊗ |n_B>.

    ``atom`` may be any of ``g``, ``e``, ``plus``, ``minus``; the dressed
    labels produce the corresponding equal-weight superposition.
    """
    try:
        atom_vec = ATOM_AMPLITUDES[atom]
    except KeyError:
        raise ConfigurationError(
            f"unknown atomic label {atom!r}; expected one of {sorted(ATOM_AMPLITUDES)}"
        ) from None
    if not (0 <= photon_a < dims.n_a and 0 <= photon_b < dims.n_b):
        raise ConfigurationError(
            f"photon numbers ({photon_a}, {photon_b}) outside truncation "
            f"({dims.n_a}, {dims.n_b})"
        )
    amps = np.zeros(dims.total, dtype=complex)
    for atom_idx in (ATOM_GROUND, ATOM_EXCITED):
        amps[dims.index(atom_idx, photon_a, photon_b)] = atom_vec[atom_idx]
    return PureState(dims, amps)


def coherent_amplitudes(alpha: complex, n: int) -> np.ndarray:
    """Fock amplitudes exp(-|a|^2/2) a^k / sqrt(k!) for k < n (not renormalized).

    The returned vector carries the untruncated normalization, so
    1 - ||c||^2 is exactly the Poisson mass beyond the cutoff.
    """
    alpha = complex(alpha)
    amps = np.empty(n, dtype=complex)
    amps[0] = math.exp(-0.5 * abs(alpha) ** 2)
    if n > 1:
        amps[1:] = amps[0] * np.cumprod(alpha / np.sqrt(np.arange(1, n, dtype=float)))
    return amps


def coherent_state(
    dims: SystemDims,
    cavity: str,
    alpha: complex,
    atom: str = "g",
    leak_tol: float = 1e-8,
) -> PureState:
    """Product state with a coherent field in one cavity, vacuum in the other.

    The coherent amplitudes are the closed-form Poisson ones, renormalized
    after truncation.  If the pre-normalization deficit exceeds ``leak_tol``
    a :class:`TruncationError` carrying the leaked mass is raised.
    """
    n = dims.cavity_levels(cavity)
    amps = coherent_amplitudes(alpha, n)
    leaked = max(0.0, 1.0 - float(np.vdot(amps, amps).real))
    if leaked > leak_tol:
        raise TruncationError(
            f"coherent state alpha={alpha} leaks {leaked:.3e} beyond {n} levels "
            f"(tolerance {leak_tol:.1e})",
            leaked=leaked,
        )
    amps = amps / np.linalg.norm(amps)
    try:
        atom_vec = ATOM_AMPLITUDES[atom]
    except KeyError:
        raise ConfigurationError(f"unknown atomic label {atom!r}") from None
    vac_other = np.zeros(dims.cavity_levels("B" if _cavity_axis(cavity) == 0 else "A"), dtype=complex)
    vac_other[0] = 1.0
    if _cavity_axis(cavity) == 0:
        field = np.kron(amps, vac_other)
    else:
        field = np.kron(vac_other, amps)
    return PureState(dims, np.kron(atom_vec, field))


def default_truncation(alpha: complex) -> int:
    """Default Fock cutoff keeping the Poisson tail below roughly 1e-8."""
    m = abs(complex(alpha))
    return int(math.ceil(m * m + 6.0 * m + 10.0))


# ---------------------------------------------------------------------------
# canonical operators
# ---------------------------------------------------------------------------

def ladder_op(dims: SystemDims, cavity: str, kind: str = "annihilate") -> Operator:
    """Embedded annihilation or creation operator for one cavity."""
    n = dims.cavity_levels(cavity)
    a = annihilator_matrix(n)
    if kind == "annihilate":
        block = a
    elif kind == "create":
        block = a.conj().T
    else:
        raise ConfigurationError(f"unknown ladder kind {kind!r}; expected 'annihilate' or 'create'")
    if _cavity_axis(cavity) == 0:
        mat = embed_parts(dims, cavity_a=block)
    else:
        mat = embed_parts(dims, cavity_b=block)
    return Operator(dims, mat)


def atomic_op(dims: SystemDims, kind: str) -> Operator:
    """Embedded 2x2 atomic operator (bare or dressed-basis flavors)."""
    mat = embed_parts(dims, atom=atomic_matrix(kind))
    hermitian = kind in ("proj_plus", "proj_minus")
    return Operator(dims, mat, hermitian=hermitian)


def displacement_matrix(alpha: complex, n: int) -> np.ndarray:
    """Single-mode displacement, expm(alpha a^dag - alpha* a), on n levels."""
    a = annihilator_matrix(n)
    x = alpha * a.conj().T - np.conj(alpha) * a
    return expm(x)


def displacement_op(dims: SystemDims, cavity: str, alpha: complex) -> Operator:
    """Embedded displacement operator for one cavity.

    The exponent acts on a single tensor factor, so the matrix exponential is
    taken on the n x n cavity block and tensored with identities, which is
    exact and avoids exponentiating the composite-dimension matrix.
    """
    n = dims.cavity_levels(cavity)
    d = displacement_matrix(alpha, n)
    if _cavity_axis(cavity) == 0:
        mat = embed_parts(dims, cavity_a=d)
    else:
        mat = embed_parts(dims, cavity_b=d)
    return Operator(dims, mat)


def leakage(state: PureState | FieldState, threshold_level: int, cavity: str) -> float:
    """Population in Fock levels >= threshold_level of the chosen cavity.

    ``threshold_level`` may equal the truncation cut (the result is then 0
    by construction, useful as a guard value in sweeps).
    """
    if threshold_level < 0:
        raise ConfigurationError("threshold_level must be non-negative")
    axis = _cavity_axis(cavity)
    if isinstance(state, PureState):
        pop = np.abs(state.reshaped()) ** 2
        photon_axis = axis + 1
        other_axes = tuple(i for i in range(3) if i != photon_axis)
    else:
        pop = np.abs(state.grid()) ** 2
        photon_axis = axis
        other_axes = (1 - axis,)
    per_level = pop.sum(axis=other_axes)
    if threshold_level >= per_level.size:
        return 0.0
    return float(per_level[threshold_level:].sum())
