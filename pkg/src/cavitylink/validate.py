"""Built-in invariant suite.

Each check measures a residual that must stay below its threshold on a
healthy build: constructor norms, operator algebra, Hermiticity of every
generator, frame round-trips, propagator equivalences, measurement
probability sums, and the damping channel's conservation guards.  The CLI
``validate`` subcommand runs the suite and fails the process if any check
fails.

Checks run at unit coupling (g = 1) so absolute thresholds are meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hilbert, measures, models, propagate, protocols
from .errors import TruncationError
from .hilbert import SystemDims
from .models import ProtocolParams
from .propagate import DensityMatrix, NoiseParams

__all__ = ["CheckResult", "run_checks", "format_report"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    threshold: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.residual < self.threshold


def _unit_params(**overrides) -> ProtocolParams:
    base = dict(
        g_a=1.0,
        g_b=1.0,
        omega_a=40.0,
        omega_b=40.0,
        delta_a=3.0,
        delta_b=3.0,
        t_a=0.7,
        t_b=1.3,
        omega_0=1000.0,
        omega_l=1000.0,
        nu_a=1003.0,
        nu_b=1003.0,
    )
    base.update(overrides)
    return ProtocolParams(**base)


def _check_constructor_norms() -> CheckResult:
    dims = SystemDims(12, 9)
    worst = 0.0
    for state in (
        hilbert.fock_state(dims, "g", 0, 0),
        hilbert.fock_state(dims, "plus", 2, 1),
        hilbert.fock_state(dims, "minus", 1, 0),
        hilbert.coherent_state(dims, "A", 0.8 + 0.3j),
        hilbert.coherent_state(dims, "B", -0.5j, atom="plus"),
        protocols.ecs_joint_target(SystemDims(20, 20), 1.0, 1.0),
    ):
        worst = max(worst, abs(state.norm() - 1.0))
    return CheckResult("constructor_norms", worst, 1e-10)


def _check_commutator() -> CheckResult:
    dims = SystemDims(10, 4)
    a = hilbert.ladder_op(dims, "A", "annihilate").matrix
    ad = hilbert.ladder_op(dims, "A", "create").matrix
    comm = a @ ad - ad @ a
    # the identity holds strictly below the top two truncated levels
    keep = np.zeros((2, dims.n_a, dims.n_b))
    keep[:, : dims.n_a - 2, :] = 1.0
    mask = keep.reshape(-1).astype(bool)
    resid = float(np.max(np.abs((comm - np.eye(dims.total))[np.ix_(mask, mask)])))
    return CheckResult("ladder_commutator", resid, 1e-12)


def _check_index_roundtrip() -> CheckResult:
    dims = SystemDims(5, 7)
    bad = 0
    for idx in range(dims.total):
        if dims.index(*dims.decode(idx)) != idx:
            bad += 1
    return CheckResult("index_roundtrip", float(bad), 0.5, detail=f"{bad} mismatches")


def _check_displacement_unitarity() -> CheckResult:
    dims = SystemDims(24, 2)
    worst = 0.0
    for alpha in (0.5 + 0.5j, 1.4, -2.0j):
        d = hilbert.displacement_op(dims, "A", alpha).matrix
        worst = max(worst, float(np.max(np.abs(d.conj().T @ d - np.eye(dims.total)))))
    return CheckResult("displacement_unitarity", worst, 1e-8)


def _check_truncation_guard() -> CheckResult:
    # a cutoff of 4 levels cannot hold a mean-4 coherent state; the
    # constructor must refuse and report the Poisson tail mass
    tail = 1.0 - math.exp(-4.0) * sum(4.0**k / math.factorial(k) for k in range(4))
    try:
        hilbert.coherent_state(SystemDims(4, 2), "A", 2.0)
    except TruncationError as exc:
        return CheckResult(
            "truncation_guard",
            abs(exc.leaked - tail),
            1e-9,
            detail=f"leaked {exc.leaked:.4f}, tail {tail:.4f}",
        )
    return CheckResult("truncation_guard", 1.0, 1e-9, detail="constructor did not reject")


def _check_hermiticity() -> CheckResult:
    params = _unit_params()
    dims = SystemDims(6, 5)
    worst = 0.0
    for cavity in ("A", "B"):
        mats = [
            models.rotating_hamiltonian(params, dims, cavity).matrix,
            models.effective_hamiltonian(params, dims, cavity).matrix,
            models.dressed_jc_hamiltonian(params, dims, cavity).matrix,
            models.dressed_ajc_hamiltonian(params, dims, cavity).matrix,
        ]
        for t in (0.0, 0.31, 1.7):
            mats.append(models.lab_hamiltonian(params, dims, cavity, t).matrix)
            mats.append(models.interaction_hamiltonian(_unit_params(big_delta=0.0), dims, cavity, t).matrix)
        for m in mats:
            worst = max(worst, float(np.max(np.abs(m - m.conj().T))))
    return CheckResult("builder_hermiticity", worst, 1e-12)


def _check_frame_roundtrip() -> CheckResult:
    params = _unit_params()
    dims = SystemDims(5, 4)
    state = hilbert.coherent_state(dims, "A", 0.6, atom="plus")
    op = models.rotating_hamiltonian(params, dims, "A")
    worst = 0.0
    for pair in ("lab-rotating", "rotating-interaction"):
        fwd = models.frame_transform(state, params, "A", pair, 0.43)
        back = models.frame_transform(fwd, params, "A", pair, 0.43, direction="backward")
        worst = max(worst, float(np.max(np.abs(back.amplitudes - state.amplitudes))))
        worst = max(worst, abs(fwd.norm() - 1.0))
        fwd_op = models.frame_transform(op, params, "A", pair, 0.43)
        back_op = models.frame_transform(fwd_op, params, "A", pair, 0.43, direction="backward")
        worst = max(worst, float(np.max(np.abs(back_op.matrix - op.matrix))))
    return CheckResult("frame_roundtrip", worst, 1e-10)


def _check_interaction_definition() -> CheckResult:
    # conjugating the rotating-frame generator into the interaction picture
    # and subtracting the frame generator must reproduce the builder
    params = _unit_params(big_delta=0.0)
    dims = SystemDims(6, 2)
    h_rot = models.rotating_hamiltonian(params, dims, "A")
    h0 = models.frame_generator(params, dims, "A", "rotating-interaction")
    worst = 0.0
    for t in (0.0, 0.27, 0.9):
        conj = models.frame_transform(h_rot, params, "A", "rotating-interaction", t)
        derived = conj.matrix - h0.matrix
        built = models.interaction_hamiltonian(params, dims, "A", t).matrix
        worst = max(worst, float(np.max(np.abs(derived - built))))
    return CheckResult("interaction_definition", worst, 1e-10)


def _check_unitary_norm() -> CheckResult:
    params = _unit_params()
    dims = SystemDims(8, 2)
    h = models.dressed_jc_hamiltonian(params, dims, "A")
    psi = hilbert.coherent_state(dims, "A", 0.7, atom="plus")
    worst = 0.0
    for t in (0.3, 0.9, 2.4):
        worst = max(worst, abs(propagate.evolve_unitary(psi, h, t).norm() - 1.0))
    return CheckResult("unitary_norm_conservation", worst, 1e-10)


def _check_unitary_composition() -> CheckResult:
    params = _unit_params()
    dims = SystemDims(8, 2)
    h = models.dressed_jc_hamiltonian(params, dims, "A")
    psi = hilbert.fock_state(dims, "plus", 1, 0)
    whole = propagate.evolve_unitary(psi, h, 0.9)
    split = propagate.evolve_unitary(propagate.evolve_unitary(psi, h, 0.4), h, 0.5)
    resid = float(np.max(np.abs(split.amplitudes - whole.amplitudes)))
    return CheckResult("unitary_composition", resid, 1e-9)


def _check_conditional_displacement_equivalence() -> CheckResult:
    params = protocols.ecs_params(1.0, 1.0, alpha_mag=1.0)
    dims = SystemDims(30, 2)
    worst = 0.0
    for gt in (0.5, 1.0, 2.0):
        psi = hilbert.fock_state(dims, "g", 0, 0)
        closed = propagate.conditional_displacement(psi, params, "A", gt)
        h = models.effective_hamiltonian(params, dims, "A")
        numeric = propagate.evolve_unitary(psi, h, gt)
        worst = max(worst, 1.0 - measures.fidelity(closed, numeric))
    return CheckResult("conditional_displacement_vs_expm", worst, 1e-7)


def _check_branch_probabilities() -> CheckResult:
    params = protocols.ecs_params(1.0, 1.0, alpha_mag=1.0)
    result = protocols.run_entangled_coherent(params, engine="analytic")
    total = sum(b.probability for b in result.branches)
    return CheckResult("branch_probability_sum", abs(total - 1.0), 1e-9)


def _check_bell_exactness() -> CheckResult:
    worst = 0.0
    for parity, runner in (("odd", protocols.run_bell_odd), ("even", protocols.run_bell_even)):
        params = protocols.bell_params(1.0, 1.0, parity=parity)
        for engine in ("analytic", "effective"):
            result = runner(params, engine=engine, dims=SystemDims(8, 8))
            outcome = protocols.expected_branch(
                protocols.ProtocolKind.BELL_ODD if parity == "odd" else protocols.ProtocolKind.BELL_EVEN
            )
            worst = max(worst, 1.0 - result.target_fidelities[outcome])
            worst = max(worst, 1.0 - result.atom_purity)
    return CheckResult("bell_protocol_exactness", worst, 1e-9)


def _check_ecs_orthogonality() -> CheckResult:
    params = protocols.ecs_params(1.0, 1.0, alpha_mag=1.0)
    result = protocols.run_entangled_coherent(params, engine="analytic")
    states = {b.outcome: b.state for b in result.branches}
    overlap = abs(states["g"].overlap(states["e"]))
    return CheckResult("ecs_branch_orthogonality", overlap, 1e-9)


def _check_lindblad_trace() -> CheckResult:
    dims = SystemDims(6, 2)
    params = _unit_params()
    h = models.dressed_jc_hamiltonian(params, dims, "A")
    rho = DensityMatrix.from_pure(hilbert.fock_state(dims, "plus", 1, 0))
    _, info = propagate.evolve_lindblad(
        rho, h, NoiseParams(kappa_a=0.05, gamma_atom=0.02), 2.0, return_info=True
    )
    return CheckResult("lindblad_trace_drift", info.max_trace_drift, 1e-7)


def _check_lindblad_closed_system() -> CheckResult:
    dims = SystemDims(6, 2)
    params = _unit_params()
    h = models.dressed_jc_hamiltonian(params, dims, "A")
    psi = hilbert.fock_state(dims, "plus", 0, 0)
    rho = propagate.evolve_lindblad(DensityMatrix.from_pure(psi), h, NoiseParams(), 1.5)
    pure = propagate.evolve_unitary(psi, h, 1.5)
    resid = 1.0 - measures.fidelity_to_pure(rho, pure)
    return CheckResult("lindblad_closed_system", resid, 1e-7)


_CHECKS = (
    _check_constructor_norms,
    _check_commutator,
    _check_index_roundtrip,
    _check_displacement_unitarity,
    _check_truncation_guard,
    _check_hermiticity,
    _check_frame_roundtrip,
    _check_interaction_definition,
    _check_unitary_norm,
    _check_unitary_composition,
    _check_conditional_displacement_equivalence,
    _check_branch_probabilities,
    _check_bell_exactness,
    _check_ecs_orthogonality,
    _check_lindblad_trace,
    _check_lindblad_closed_system,
)


def run_checks() -> list[CheckResult]:
    """Run the full invariant suite and return per-check results."""
    return [check() for check in _CHECKS]


def format_report(results: list[CheckResult]) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        detail = f"  ({r.detail})" if r.detail else ""
        lines.append(
            f"{status}  {r.name:<36s} residual={r.residual:.3e}  threshold={r.threshold:.1e}{detail}"
        )
    n_fail = sum(not r.passed for r in results)
    lines.append(
        f"{len(results) - n_fail}/{len(results)} checks passed"
        + (f", {n_fail} FAILED" if n_fail else "")
    )
    return "\n".join(lines)
