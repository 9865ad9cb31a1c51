"""Time evolution: exact exponentials, a step-doubling midpoint integrator
for time-dependent generators, the conditional-displacement propagator, and
a dense Lindblad channel for decoherence budgets.

The midpoint integrator advances with U_step = exp(-i H(t_mid) dt), which is
unitary for every step regardless of the step size, so norm drift can never
masquerade as physics.  Convergence is certified by comparing the final
state at N and 2N steps (Cauchy criterion); the step count doubles
automatically until the two agree, bounded by ``STEP_LIMIT`` total steps.

When the generator is periodic and the requested duration covers an integer
number of periods that divides the step grid, the product of step unitaries
is regrouped into one per-period block raised to an integer power.  This is
the same product, just evaluated cheaply, and is how the strongly driven
runs stay tractable.

All functions are pure; independent evolutions may run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import hilbert
from .errors import (
    ConfigurationError,
    ContractViolationError,
    ConvergenceError,
    IntegrationError,
    UnsupportedConfigurationError,
)
from .hilbert import Operator, PureState, SystemDims
from .models import HarmonicHamiltonian, ProtocolParams

__all__ = [
    "NoiseParams",
    "DensityMatrix",
    "EvolutionInfo",
    "LindbladInfo",
    "STEP_LIMIT",
    "evolve_unitary",
    "evolve_time_dependent",
    "conditional_displacement",
    "evolve_lindblad",
    "hermitian_propagator",
    "midpoint_propagator",
    "converge_midpoint",
]

STEP_LIMIT = 2 ** 20

# target max ||H|| * dt for the initial step grid
_INITIAL_STEP_DENSITY = 0.1

_EIGH_CHUNK = 4096


@dataclass(frozen=True)
class NoiseParams:
    """Energy decay rates (1/s) for the two cavities and the atom."""

    kappa_a: float = 0.0
    kappa_b: float = 0.0
    gamma_atom: float = 0.0

    def __post_init__(self):
        if min(self.kappa_a, self.kappa_b, self.gamma_atom) < 0.0:
            raise ConfigurationError("decay rates must be non-negative")

    def any_active(self) -> bool:
        return max(self.kappa_a, self.kappa_b, self.gamma_atom) > 0.0


@dataclass(frozen=True)
class DensityMatrix:
    """Dense density matrix on the composite space.

    Construction validates Hermiticity, unit trace and positivity within
    ``tol`` (stricter defaults for exact constructions; integrators pass a
    looser tolerance matching their guaranteed drift).
    """

    dims: SystemDims
    matrix: np.ndarray
    tol: float = 1e-9

    def __post_init__(self):
        mat = np.ascontiguousarray(np.asarray(self.matrix), dtype=complex)
        if mat.shape != (self.dims.total, self.dims.total):
            raise ConfigurationError(
                f"density matrix shape {mat.shape} does not match dimension {self.dims.total}"
            )
        herm = float(np.max(np.abs(mat - mat.conj().T)))
        if herm > max(self.tol, 1e-10):
            raise ConfigurationError(f"density matrix deviates from Hermitian by {herm:.3e}")
        tr = float(np.trace(mat).real)
        if abs(tr - 1.0) > max(self.tol, 1e-9):
            raise ConfigurationError(f"density matrix trace {tr} is not 1")
        min_eig = float(np.linalg.eigvalsh(mat).min())
        if min_eig < -max(self.tol, 1e-9):
            raise ConfigurationError(f"density matrix has negative eigenvalue {min_eig:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityMatrix":
        amps = state.amplitudes
        return cls(state.dims, np.outer(amps, amps.conj()))

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclass(frozen=True)
class EvolutionInfo:
    """Diagnostics of one step-doubling midpoint run."""

    steps: int
    doublings: int
    residual: float
    tolerance: float
    folded_periods: int = 1


@dataclass(frozen=True)
class LindbladInfo:
    steps: int
    max_trace_drift: float
    min_eigenvalue: float


def _require_hermitian(matrix: np.ndarray, what: str) -> None:
    scale = max(1.0, float(np.max(np.abs(matrix))))
    dev = float(np.max(np.abs(matrix - matrix.conj().T)))
    if dev > 1e-12 * scale:
        raise ContractViolationError(f"{what} is not Hermitian (max deviation {dev:.3e})")


def hermitian_propagator(h: np.ndarray, duration: float) -> np.ndarray:
    """exp(-i h duration) for Hermitian h via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * duration)) @ v.conj().T


def evolve_unitary(state: PureState, hamiltonian: Operator, duration: float) -> PureState:
    """Propagate under a time-independent Hermitian generator."""
    hilbert._require_same_dims(state, hamiltonian)
    _require_hermitian(hamiltonian.matrix, "hamiltonian")
    if duration == 0.0:
        return state
    u = hermitian_propagator(hamiltonian.matrix, duration)
    return PureState(state.dims, u @ state.amplitudes)


# ---------------------------------------------------------------------------
# midpoint propagation of time-dependent generators
# ---------------------------------------------------------------------------

HamiltonianFn = Union[HarmonicHamiltonian, Callable[[float], Union[Operator, np.ndarray]]]


def _as_matrix(value) -> np.ndarray:
    if isinstance(value, Operator):
        return value.matrix
    return np.asarray(value, dtype=complex)


def _sample_stack(ham: HamiltonianFn, ts: np.ndarray) -> np.ndarray:
    if isinstance(ham, HarmonicHamiltonian):
        return ham.sample(ts)
    return np.stack([_as_matrix(ham(float(t))) for t in ts])


def _fold_product(us: np.ndarray) -> np.ndarray:
    """Ordered product us[-1] @ ... @ us[0] via pairwise reduction."""
    while us.shape[0] > 1:
        n = us.shape[0]
        even = n - (n % 2)
        paired = np.matmul(us[1:even:2], us[0:even:2])
        us = np.concatenate([paired, us[-1:]], axis=0) if n % 2 == 1 else paired
    return us[0]


def _product_over_interval(ham: HamiltonianFn, t0: float, duration: float, steps: int) -> np.ndarray:
    """Chunked midpoint-exponential product over [t0, t0 + duration]."""
    dt = duration / steps
    dim = ham.dim if isinstance(ham, HarmonicHamiltonian) else _as_matrix(ham(t0)).shape[0]
    u_total = np.eye(dim, dtype=complex)
    for start in range(0, steps, _EIGH_CHUNK):
        count = min(_EIGH_CHUNK, steps - start)
        ts = t0 + (start + np.arange(count) + 0.5) * dt
        hs = _sample_stack(ham, ts)
        ws, vs = np.linalg.eigh(hs)
        phases = np.exp(-1j * ws * dt)
        us = np.einsum("tij,tj,tkj->tik", vs, phases, vs.conj())
        u_total = _fold_product(us) @ u_total
    return u_total


def midpoint_propagator(
    ham: HamiltonianFn,
    duration: float,
    steps: int,
    period: float | None = None,
) -> np.ndarray:
    """Product of midpoint-exponential steps over [0, duration].

    With a commensurate ``period`` (duration = m * period, steps divisible
    by m) the product is computed as one per-period block raised to the
    m-th power; otherwise a straight sequential product is used.
    """
    if steps < 1:
        raise ConfigurationError("steps must be >= 1")
    if duration == 0.0:
        dim = ham.dim if isinstance(ham, HarmonicHamiltonian) else _as_matrix(ham(0.0)).shape[0]
        return np.eye(dim, dtype=complex)
    m = _commensurate_periods(duration, period)
    if m is not None and m > 1 and steps % m == 0:
        u_period = _product_over_interval(ham, 0.0, duration / m, steps // m)
        return np.linalg.matrix_power(u_period, m)
    return _product_over_interval(ham, 0.0, duration, steps)


def _commensurate_periods(duration: float, period: float | None) -> int | None:
    if period is None or period <= 0.0:
        return None
    ratio = duration / period
    m = int(round(ratio))
    if m >= 1 and abs(ratio - m) < 1e-9 * max(1.0, ratio):
        return m
    return None


def _norm_bound(ham: HamiltonianFn, duration: float) -> float:
    if isinstance(ham, HarmonicHamiltonian):
        return ham.norm_bound()
    ts = np.linspace(0.0, duration, 17)
    return max(float(np.linalg.norm(_as_matrix(ham(float(t))), 2)) for t in ts)


def _check_sampled_hermitian(ham: HamiltonianFn, duration: float) -> None:
    for frac in (0.0, 0.37, 0.81):
        h = _as_matrix(ham(frac * duration)) if not isinstance(ham, HarmonicHamiltonian) \
            else ham(frac * duration)
        _require_hermitian(np.asarray(h), "time-dependent hamiltonian sample")


def initial_steps(ham: HamiltonianFn, duration: float, requested: int | None = None) -> int:
    """First step count of the refinement ladder: max ||H|| dt <= 0.1."""
    floor = max(1, int(math.ceil(abs(duration) * _norm_bound(ham, duration) / _INITIAL_STEP_DENSITY)))
    return max(int(requested) if requested else 1, floor)


def converge_midpoint(
    ham: HamiltonianFn,
    duration: float,
    apply_fn: Callable[[np.ndarray], np.ndarray],
    steps: int | None = None,
    tolerance: float = 1e-8,
    period: float | None = None,
    step_limit: int = STEP_LIMIT,
) -> tuple[np.ndarray, EvolutionInfo]:
    """Step-doubling midpoint refinement, certified on the propagated state.

    ``apply_fn`` maps a propagator matrix to the final state vector this run
    is being used for; the Cauchy residual is the 2-norm of the difference
    of those vectors between N and 2N steps.
    """
    if duration == 0.0:
        dim = ham.dim if isinstance(ham, HarmonicHamiltonian) else _as_matrix(ham(0.0)).shape[0]
        eye = np.eye(dim, dtype=complex)
        return apply_fn(eye), EvolutionInfo(0, 0, 0.0, tolerance)
    _check_sampled_hermitian(ham, duration)
    n = initial_steps(ham, duration, steps)
    m = _commensurate_periods(duration, period)
    if m is not None:
        n = m * max(1, int(math.ceil(n / m)))
    u_prev = midpoint_propagator(ham, duration, n, period)
    psi_prev = apply_fn(u_prev)
    doublings = 0
    residual = math.inf
    while 2 * n <= step_limit:
        u_next = midpoint_propagator(ham, duration, 2 * n, period)
        psi_next = apply_fn(u_next)
        residual = float(np.linalg.norm(psi_next - psi_prev))
        if residual <= tolerance:
            info = EvolutionInfo(
                steps=2 * n,
                doublings=doublings,
                residual=residual,
                tolerance=tolerance,
                folded_periods=m if m is not None else 1,
            )
            return psi_next, info
        n *= 2
        u_prev, psi_prev = u_next, psi_next
        doublings += 1
    raise ConvergenceError(
        f"midpoint refinement did not reach tolerance {tolerance:.1e} within "
        f"{step_limit} steps (last residual {residual:.3e} at {n} steps)",
        residual=residual if residual != math.inf else float("nan"),
        steps=n,
    )


def evolve_time_dependent(
    state: PureState,
    hamiltonian: HamiltonianFn,
    duration: float,
    steps: int | None = None,
    tolerance: float = 1e-8,
    period: float | None = None,
    return_info: bool = False,
):
    """Propagate under a time-dependent generator on the composite space.

    ``hamiltonian`` is either a callable t -> Operator/ndarray or a
    :class:`HarmonicHamiltonian`; it must be Hermitian at every sampled
    time.  ``steps`` seeds the refinement ladder (raised automatically if
    too coarse for the generator's norm).
    """
    amps = state.amplitudes

    def apply(u: np.ndarray) -> np.ndarray:
        return u @ amps

    psi, info = converge_midpoint(
        hamiltonian, duration, apply, steps=steps, tolerance=tolerance, period=period
    )
    out = PureState(state.dims, psi)
    if return_info:
        return out, info
    return out


# ---------------------------------------------------------------------------
# conditional displacement
# ---------------------------------------------------------------------------

def conditional_displacement(
    state: PureState,
    params: ProtocolParams,
    cavity: str,
    duration: float,
) -> PureState:
    """Closed-form strong-drive propagator at cavity resonance.

    Displaces the chosen cavity by alpha = -i g t / 2 conditioned on the
    dressed atomic state: D(alpha)|+><+| + D(-alpha)|-><-|.  Only the
    resonant case (cavity detuning zero) has this form; other detunings are
    rejected.
    """
    g = params.g(cavity)
    if abs(params.delta(cavity)) > 1e-9 * max(g, 1.0):
        raise UnsupportedConfigurationError(
            "conditional displacement requires zero cavity detuning "
            f"(got delta={params.delta(cavity)})"
        )
    n = state.dims.cavity_levels(cavity)
    alpha = -0.5j * g * duration
    d_plus = hilbert.displacement_matrix(alpha, n)
    d_minus = d_plus.conj().T  # D(-alpha) = D(alpha)^dag, exactly inverse
    block = np.kron(hilbert.atomic_matrix("proj_plus"), d_plus) + np.kron(
        hilbert.atomic_matrix("proj_minus"), d_minus
    )
    return hilbert.apply_joint_unitary(state, block, cavity)


# ---------------------------------------------------------------------------
# Lindblad channel
# ---------------------------------------------------------------------------

def _lindblad_rhs(h: np.ndarray, rho: np.ndarray, jumps: list[tuple[float, np.ndarray]]) -> np.ndarray:
    drho = -1j * (h @ rho - rho @ h)
    for rate, op in jumps:
        op_dag = op.conj().T
        anti = op_dag @ op
        drho += rate * (op @ rho @ op_dag - 0.5 * (anti @ rho + rho @ anti))
    return drho


def evolve_lindblad(
    rho: DensityMatrix,
    hamiltonian: Operator,
    noise: NoiseParams,
    duration: float,
    steps: int | None = None,
    return_info: bool = False,
):
    """Fixed-step 4th-order integration of the damped master equation.

    Jump operators are the two cavity annihilators and the bare atomic
    lowering operator, weighted by the rates in ``noise``.  The trace is
    renormalized each step; if any single step drifts by more than 1e-6 the
    integration aborts, and the largest drift seen is reported.
    """
    hilbert._require_same_dims(rho, hamiltonian)
    _require_hermitian(hamiltonian.matrix, "hamiltonian")
    dims = rho.dims
    h = hamiltonian.matrix
    jumps = []
    if noise.kappa_a > 0.0:
        jumps.append((noise.kappa_a, hilbert.ladder_op(dims, "A", "annihilate").matrix))
    if noise.kappa_b > 0.0:
        jumps.append((noise.kappa_b, hilbert.ladder_op(dims, "B", "annihilate").matrix))
    if noise.gamma_atom > 0.0:
        jumps.append((noise.gamma_atom, hilbert.atomic_op(dims, "sigma").matrix))

    if duration == 0.0:
        info = LindbladInfo(0, 0.0, float(np.linalg.eigvalsh(rho.matrix).min()))
        return (rho, info) if return_info else rho

    if steps is None:
        scale = float(np.linalg.norm(h, 2)) + sum(rate for rate, _ in jumps)
        steps = max(100, int(math.ceil(duration * scale / 0.02)))
    dt = duration / steps

    mat = np.array(rho.matrix, dtype=complex)
    max_drift = 0.0
    for _ in range(steps):
        k1 = _lindblad_rhs(h, mat, jumps)
        k2 = _lindblad_rhs(h, mat + 0.5 * dt * k1, jumps)
        k3 = _lindblad_rhs(h, mat + 0.5 * dt * k2, jumps)
        k4 = _lindblad_rhs(h, mat + dt * k3, jumps)
        mat = mat + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        mat = 0.5 * (mat + mat.conj().T)
        drift = abs(float(np.trace(mat).real) - 1.0)
        max_drift = max(max_drift, drift)
        if drift > 1e-6:
            raise IntegrationError(
                f"trace drifted by {drift:.3e} in one step ({steps} steps, dt={dt:.3e}); "
                "increase the step count"
            )
        mat /= float(np.trace(mat).real)

    min_eig = float(np.linalg.eigvalsh(mat).min())
    if min_eig < -1e-7:
        raise IntegrationError(f"density matrix lost positivity (min eigenvalue {min_eig:.3e})")
    out = DensityMatrix(dims, mat, tol=1e-7)
    if return_info:
        return out, LindbladInfo(steps, max_drift, min_eig)
    return out
