"""Hamiltonians for a classically driven two-level atom coupled to one cavity.

Three frames are exposed, connected by exact unitary transformations:

* lab frame: atomic and cavity energies plus a drive oscillating at the
  drive frequency ``omega_l``;
* rotating frame (at ``omega_l``): detunings ``big_delta`` (atom) and
  ``delta_j`` (cavity) with a static drive term;
* interaction picture with respect to ``delta_j a^dag a + Omega_j
  (sigma^dag + sigma)``: the exchange coupling written in the dressed
  atomic basis with phases rotating at ``2 Omega_j`` and ``delta_j``.

From the interaction-picture generator, three static approximations follow
for specific detuning choices:

* ``delta = 0`` and strong drive: the conditional-displacement generator
  ``(g/2)(sigma^dag + sigma)(a + a^dag)``;
* ``delta = +2 Omega``: exchange coupling ``(g/2)(|+><-| a + |-><+| a^dag)``
  between the dressed states (resonant excitation swap);
* ``delta = -2 Omega``: the co-creating counterpart
  ``(g/2)(|-><+| a + |+><-| a^dag)``.

Validity conditions (strong drive, large detuning) are never enforced by
the builders; they always construct, and callers record the ratios so the
quality of each approximation can be measured rather than assumed.

Builders are pure functions of immutable parameters and are thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Union

import numpy as np

from . import hilbert
from .errors import ConfigurationError, UnsupportedConfigurationError
from .hilbert import Operator, PureState, SystemDims

__all__ = [
    "ProtocolParams",
    "ModelKind",
    "HarmonicHamiltonian",
    "lab_hamiltonian",
    "rotating_hamiltonian",
    "interaction_hamiltonian",
    "effective_hamiltonian",
    "dressed_jc_hamiltonian",
    "dressed_ajc_hamiltonian",
    "hamiltonian",
    "frame_generator",
    "frame_transform",
    "interaction_generator",
    "rotating_matrix",
    "lab_matrix",
    "interaction_matrix",
    "effective_matrix",
    "dressed_jc_matrix",
    "dressed_ajc_matrix",
]

_REL_TOL = 1e-9


@dataclass(frozen=True)
class ProtocolParams:
    """Physical parameters of the two-cavity sequence (angular units, rad/s).

    ``omega_a`` / ``omega_b`` are the classical Rabi frequencies of the
    drive while the atom sits in cavity A / B; ``delta_a`` / ``delta_b`` are
    the cavity detunings from the drive and ``big_delta`` the atomic one.
    The absolute frequencies ``omega_0``, ``omega_l``, ``nu_a``, ``nu_b``
    are only needed for lab-frame builds and, when supplied, must be
    consistent with the detunings.
    """

    g_a: float
    g_b: float
    omega_a: float = 0.0
    omega_b: float = 0.0
    delta_a: float = 0.0
    delta_b: float = 0.0
    big_delta: float = 0.0
    t_a: float = 0.0
    t_b: float = 0.0
    omega_0: float | None = None
    omega_l: float | None = None
    nu_a: float | None = None
    nu_b: float | None = None

    def __post_init__(self):
        if self.g_a <= 0.0 or self.g_b <= 0.0:
            raise ConfigurationError(
                f"coupling strengths must be positive, got g_a={self.g_a}, g_b={self.g_b}"
            )
        if self.t_a < 0.0 or self.t_b < 0.0:
            raise ConfigurationError("interaction durations must be non-negative")
        if self.omega_0 is not None and self.omega_l is not None:
            self._check_consistent("big_delta", self.big_delta, self.omega_0 - self.omega_l)
        if self.nu_a is not None and self.omega_l is not None:
            self._check_consistent("delta_a", self.delta_a, self.nu_a - self.omega_l)
        if self.nu_b is not None and self.omega_l is not None:
            self._check_consistent("delta_b", self.delta_b, self.nu_b - self.omega_l)

    @staticmethod
    def _check_consistent(name: str, value: float, derived: float) -> None:
        scale = max(abs(value), abs(derived), 1.0)
        if abs(value - derived) > _REL_TOL * scale:
            raise ConfigurationError(
                f"{name}={value} inconsistent with absolute frequencies (expected {derived})"
            )

    # per-cavity accessors keep the builders free of A/B branching
    def g(self, cavity: str) -> float:
        return self.g_a if hilbert._cavity_axis(cavity) == 0 else self.g_b

    def omega(self, cavity: str) -> float:
        return self.omega_a if hilbert._cavity_axis(cavity) == 0 else self.omega_b

    def delta(self, cavity: str) -> float:
        return self.delta_a if hilbert._cavity_axis(cavity) == 0 else self.delta_b

    def nu(self, cavity: str) -> float | None:
        return self.nu_a if hilbert._cavity_axis(cavity) == 0 else self.nu_b

    def duration(self, cavity: str) -> float:
        return self.t_a if hilbert._cavity_axis(cavity) == 0 else self.t_b


class ModelKind(str, Enum):
    LAB_FRAME = "lab"
    ROTATING_FRAME = "rotating"
    INTERACTION_PICTURE = "interaction"
    EFFECTIVE_RESONANT = "effective"
    DRESSED_JC = "dressed_jc"
    DRESSED_AJC = "dressed_ajc"


# ---------------------------------------------------------------------------
# matrix-level builders on the atom ⊗ (one cavity) block
# ---------------------------------------------------------------------------

def _exchange(n: int, g: float) -> np.ndarray:
    """g (sigma^dag a + sigma a^dag) on 2n dimensions, exactly Hermitian."""
    a = hilbert.annihilator_matrix(n)
    x = g * np.kron(hilbert.atomic_matrix("sigma_dag"), a)
    return x + x.conj().T


def rotating_matrix(params: ProtocolParams, n: int, cavity: str) -> np.ndarray:
    """Frame rotating at the drive frequency: detunings + static drive + exchange."""
    a = hilbert.annihilator_matrix(n)
    num = a.conj().T @ a
    h = params.big_delta * np.kron(np.diag([0.0, 1.0]).astype(complex), np.eye(n))
    h = h + params.delta(cavity) * np.kron(np.eye(2, dtype=complex), num)
    h = h + params.omega(cavity) * np.kron(
        hilbert.atomic_matrix("sigma") + hilbert.atomic_matrix("sigma_dag"), np.eye(n)
    )
    return h + _exchange(n, params.g(cavity))


def lab_matrix(params: ProtocolParams, n: int, cavity: str, t: float) -> np.ndarray:
    """Lab frame at time t; requires the absolute frequencies."""
    if params.omega_0 is None or params.omega_l is None or params.nu(cavity) is None:
        raise ConfigurationError(
            "lab-frame build requires omega_0, omega_l and the cavity frequency nu"
        )
    a = hilbert.annihilator_matrix(n)
    num = a.conj().T @ a
    h = params.omega_0 * np.kron(np.diag([0.0, 1.0]).astype(complex), np.eye(n))
    h = h + params.nu(cavity) * np.kron(np.eye(2, dtype=complex), num)
    drive = params.omega(cavity) * np.exp(-1j * params.omega_l * t) * np.kron(
        hilbert.atomic_matrix("sigma_dag"), np.eye(n)
    )
    h = h + drive + drive.conj().T
    return h + _exchange(n, params.g(cavity))


@dataclass(frozen=True)
class HarmonicHamiltonian:
    """Generator of the form H(t) = sum_k exp(i w_k t) M_k.

    The (w_k, M_k) list is closed under Hermitian pairing, so H(t) is
    Hermitian at every t.  ``sample`` evaluates a whole time grid at once,
    which is what the midpoint propagator consumes.
    """

    freqs: np.ndarray
    matrices: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float).reshape(-1)
        mats = np.asarray(self.matrices, dtype=complex)
        if mats.ndim != 3 or mats.shape[0] != freqs.size or mats.shape[1] != mats.shape[2]:
            raise ConfigurationError("matrices must be a (K, d, d) stack matching freqs")
        freqs.setflags(write=False)
        mats.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "matrices", mats)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def __call__(self, t: float) -> np.ndarray:
        phases = np.exp(1j * self.freqs * float(t))
        return np.einsum("k,kij->ij", phases, self.matrices)

    def sample(self, ts: np.ndarray) -> np.ndarray:
        """Stack H(t) over a grid of times, shape (len(ts), d, d)."""
        phases = np.exp(1j * np.outer(np.asarray(ts, dtype=float), self.freqs))
        return np.einsum("tk,kij->tij", phases, self.matrices)

    def norm_bound(self) -> float:
        """Upper bound on sup_t ||H(t)||_2 (triangle inequality)."""
        return float(sum(np.linalg.norm(m, 2) for m in self.matrices))

    def period(self) -> float | None:
        """Common period of all oscillating terms, if one exists."""
        nonzero = np.abs(self.freqs[np.abs(self.freqs) > 0.0])
        if nonzero.size == 0:
            return None
        base = nonzero.min()
        ratios = nonzero / base
        if np.max(np.abs(ratios - np.round(ratios))) > 1e-9:
            return None
        return 2.0 * math.pi / base


def interaction_generator(params: ProtocolParams, n: int, cavity: str) -> HarmonicHamiltonian:
    """Interaction-picture generator on the atom ⊗ cavity block.

    Only the resonant-atom case (``big_delta == 0``) is supported; a nonzero
    atomic detuning would add terms this decomposition does not contain.
    """
    if params.big_delta != 0.0:
        raise UnsupportedConfigurationError(
            "interaction-picture generator requires big_delta == 0"
        )
    g = params.g(cavity)
    omega = params.omega(cavity)
    delta = params.delta(cavity)
    a = hilbert.annihilator_matrix(n)
    ad = a.conj().T
    pz = hilbert.atomic_matrix("proj_plus") - hilbert.atomic_matrix("proj_minus")
    fpm = hilbert.atomic_matrix("flip_pm")
    fmp = hilbert.atomic_matrix("flip_mp")
    half_g = 0.5 * g
    terms = [
        (-delta, half_g * np.kron(pz, a)),
        (+delta, half_g * np.kron(pz, ad)),
        (2.0 * omega - delta, half_g * np.kron(fpm, a)),
        (-(2.0 * omega - delta), half_g * np.kron(fmp, ad)),
        (-(2.0 * omega + delta), -half_g * np.kron(fmp, a)),
        (+(2.0 * omega + delta), -half_g * np.kron(fpm, ad)),
    ]
    freqs = np.array([f for f, _ in terms])
    mats = np.stack([m for _, m in terms])
    return HarmonicHamiltonian(freqs, mats)


def interaction_matrix(params: ProtocolParams, n: int, cavity: str, t: float) -> np.ndarray:
    """Interaction-picture generator evaluated at a single time."""
    return interaction_generator(params, n, cavity)(t)


def effective_matrix(params: ProtocolParams, n: int, cavity: str) -> np.ndarray:
    """Strong-drive, resonant-cavity limit: (g/2)(sigma^dag + sigma)(a + a^dag)."""
    a = hilbert.annihilator_matrix(n)
    sx = hilbert.atomic_matrix("sigma") + hilbert.atomic_matrix("sigma_dag")
    return 0.5 * params.g(cavity) * np.kron(sx, a + a.conj().T)


def dressed_jc_matrix(params: ProtocolParams, n: int, cavity: str) -> np.ndarray:
    """Dressed-basis excitation exchange: (g/2)(|+><-| a + |-><+| a^dag)."""
    a = hilbert.annihilator_matrix(n)
    x = 0.5 * params.g(cavity) * np.kron(hilbert.atomic_matrix("flip_pm"), a)
    return x + x.conj().T


def dressed_ajc_matrix(params: ProtocolParams, n: int, cavity: str) -> np.ndarray:
    """Dressed-basis co-creation coupling: (g/2)(|-><+| a + |+><-| a^dag)."""
    a = hilbert.annihilator_matrix(n)
    x = 0.5 * params.g(cavity) * np.kron(hilbert.atomic_matrix("flip_mp"), a)
    return x + x.conj().T


# ---------------------------------------------------------------------------
# composite-space builders
# ---------------------------------------------------------------------------

def _embed(dims: SystemDims, block: np.ndarray, cavity: str) -> Operator:
    return Operator(dims, hilbert.embed_atom_cavity(dims, block, cavity), hermitian=True)


def lab_hamiltonian(params: ProtocolParams, dims: SystemDims, cavity: str, t: float) -> Operator:
    return _embed(dims, lab_matrix(params, dims.cavity_levels(cavity), cavity, t), cavity)


def rotating_hamiltonian(params: ProtocolParams, dims: SystemDims, cavity: str) -> Operator:
    return _embed(dims, rotating_matrix(params, dims.cavity_levels(cavity), cavity), cavity)


def interaction_hamiltonian(params: ProtocolParams, dims: SystemDims, cavity: str, t: float) -> Operator:
    return _embed(dims, interaction_matrix(params, dims.cavity_levels(cavity), cavity, t), cavity)


def effective_hamiltonian(params: ProtocolParams, dims: SystemDims, cavity: str) -> Operator:
    return _embed(dims, effective_matrix(params, dims.cavity_levels(cavity), cavity), cavity)


def dressed_jc_hamiltonian(params: ProtocolParams, dims: SystemDims, cavity: str) -> Operator:
    return _embed(dims, dressed_jc_matrix(params, dims.cavity_levels(cavity), cavity), cavity)


def dressed_ajc_hamiltonian(params: ProtocolParams, dims: SystemDims, cavity: str) -> Operator:
    return _embed(dims, dressed_ajc_matrix(params, dims.cavity_levels(cavity), cavity), cavity)


def hamiltonian(
    kind: ModelKind,
    params: ProtocolParams,
    dims: SystemDims,
    cavity: str,
    t: float | None = None,
) -> Operator:
    """Dispatch a model kind to its builder; time-dependent kinds need ``t``."""
    kind = ModelKind(kind)
    if kind in (ModelKind.LAB_FRAME, ModelKind.INTERACTION_PICTURE):
        if t is None:
            raise ConfigurationError(f"model {kind.value} is time-dependent and needs t")
        if kind is ModelKind.LAB_FRAME:
            return lab_hamiltonian(params, dims, cavity, t)
        return interaction_hamiltonian(params, dims, cavity, t)
    builder = {
        ModelKind.ROTATING_FRAME: rotating_hamiltonian,
        ModelKind.EFFECTIVE_RESONANT: effective_hamiltonian,
        ModelKind.DRESSED_JC: dressed_jc_hamiltonian,
        ModelKind.DRESSED_AJC: dressed_ajc_hamiltonian,
    }[kind]
    return builder(params, dims, cavity)


# ---------------------------------------------------------------------------
# frame transformations
# ---------------------------------------------------------------------------

_FRAME_PAIRS = ("lab-rotating", "rotating-interaction")


def frame_generator(params: ProtocolParams, dims: SystemDims, cavity: str, pair: str) -> Operator:
    """The static generator H0 whose exp(+i H0 t) connects the frame pair.

    ``lab-rotating`` uses the drive-frequency number operator
    ``omega_l (sigma^dag sigma + a^dag a)``; ``rotating-interaction`` uses
    ``delta a^dag a + Omega (sigma^dag + sigma)``.
    """
    n = dims.cavity_levels(cavity)
    a = hilbert.annihilator_matrix(n)
    num = a.conj().T @ a
    if pair == "lab-rotating":
        if params.omega_l is None:
            raise ConfigurationError("lab-rotating transform requires omega_l")
        block = params.omega_l * (
            np.kron(np.diag([0.0, 1.0]).astype(complex), np.eye(n))
            + np.kron(np.eye(2, dtype=complex), num)
        )
    elif pair == "rotating-interaction":
        sx = hilbert.atomic_matrix("sigma") + hilbert.atomic_matrix("sigma_dag")
        block = params.delta(cavity) * np.kron(np.eye(2, dtype=complex), num) + params.omega(
            cavity
        ) * np.kron(sx, np.eye(n))
    else:
        raise ConfigurationError(f"unknown frame pair {pair!r}; expected one of {_FRAME_PAIRS}")
    return _embed(dims, block, cavity)


def frame_transform(
    obj: Union[Operator, PureState],
    params: ProtocolParams,
    cavity: str,
    pair: str,
    t: float,
    direction: str = "forward",
) -> Union[Operator, PureState]:
    """Apply the exact frame unitary U = exp(+i H0 t) to a state or operator.

    ``forward`` moves toward the more-rotated frame (lab to rotating, or
    rotating to interaction): states map as U|psi>, operators as U M U^dag.
    ``backward`` applies the inverse.  The transform is purely the
    conjugation; subtracting H0 from a transformed generator is left to the
    caller because it only applies to Hamiltonians.
    """
    dims = obj.dims
    h0 = frame_generator(params, dims, cavity, pair).matrix
    sign = {"forward": +1.0, "backward": -1.0}.get(direction)
    if sign is None:
        raise ConfigurationError(f"direction must be 'forward' or 'backward', got {direction!r}")
    w, v = np.linalg.eigh(h0)
    u = (v * np.exp(1j * sign * w * t)) @ v.conj().T
    if isinstance(obj, PureState):
        return PureState(dims, u @ obj.amplitudes)
    if isinstance(obj, Operator):
        return Operator(dims, u @ obj.matrix @ u.conj().T, hermitian=False)
    raise ConfigurationError(f"frame_transform expects Operator or PureState, got {type(obj)!r}")
