"""Equilibrium wage computation by damped fixed-point iteration.

Market clearing requires, for every match type (x, y), that the mass of
type-x workers choosing firm type y equals the mass of type-y firms
choosing worker type x:

    n^X_x p^X_xy(W) = n^Y_y p^Y_xy(W).

The solver iterates the map

    F(W)_xy = w_xy + D_xy (log n^Y_y + log p^Y_xy - log n^X_x - log p^X_xy),

which raises wages where firm demand exceeds worker supply and lowers them
where supply exceeds demand, all entries updated simultaneously. The
damping matrix D is built from the taste-shock scales, wage sensitivities,
and per-model step scalars c in (0, 1]; with them the map is a contraction
whenever every scaled own-elasticity c * e stays below one, which holds for
the supported models by construction, so the iteration converges to the
unique equilibrium from any starting point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tumatch.gev import GevGenerator, generator_for
from tumatch.kernels import _side_logprobs, firm_logprobs, worker_logprobs
from tumatch.market import (
    GeneralizedNestedLogit,
    Logit,
    NestedLogit,
    SpecError,
    ValidatedSpec,
    check_wages,
    scaled_payoffs,
    validate_spec,
)

__all__ = [
    "NumericsError",
    "StepScalars",
    "SolveOptions",
    "Matching",
    "SolveResult",
    "step_scalars",
    "damping",
    "fixed_point_map",
    "clearing_residual",
    "solve",
    "generator_fixed_point_map",
    "solve_via_generators",
]


class NumericsError(RuntimeError):
    """An iteration produced a non-finite value."""


@dataclass(frozen=True, eq=False)
class StepScalars:
    """Per-match step scalars c in (0, 1] entering the damping matrix.

    ``worker[x, y]`` scales the worker side of match (x, y) and ``firm[x, y]``
    the firm side. Logit sides take 1; a nested logit side takes the nesting
    parameter of the nest containing the alternative, and a generalized
    nested logit side the smallest of its nesting parameters.
    """

    worker: np.ndarray
    firm: np.ndarray


@dataclass(frozen=True)
class SolveOptions:
    """Controls for :func:`solve`.

    ``tolerance`` bounds the supremum norm of the last wage update;
    ``initial_wages`` defaults to all zeros; ``trace_every`` = n keeps every
    n-th trace entry of a converged run (0 keeps none), while a run that
    fails to converge always returns its full trace.
    """

    tolerance: float = 1e-10
    max_iterations: int = 100000
    initial_wages: object = None
    trace_every: int = 0

    def check(self) -> None:
        if not np.isfinite(self.tolerance) or self.tolerance <= 0.0:
            raise SpecError(f"tolerance must be > 0; got {self.tolerance!r}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise SpecError(f"max_iterations must be an integer >= 1; got {self.max_iterations!r}")
        if int(self.trace_every) != self.trace_every or self.trace_every < 0:
            raise SpecError(f"trace_every must be an integer >= 0; got {self.trace_every!r}")


@dataclass(frozen=True, eq=False)
class Matching:
    """Equilibrium allocation of both populations.

    ``matched[x, y]`` is the mass of worker type x employed at firm type y;
    ``unmatched_workers[x]`` and ``vacant_firms[y]`` are the masses taking
    the outside options. Rows and columns add back to the type masses.
    """

    matched: np.ndarray
    unmatched_workers: np.ndarray
    vacant_firms: np.ndarray


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Outcome of a fixed-point run.

    ``trace`` is a list of (iteration, update norm, clearing residual)
    triples, thinned according to :class:`SolveOptions.trace_every` when the
    run converged and complete when it did not; None when no trace was
    requested on a converged run.
    """

    wages: np.ndarray
    matching: Matching
    iterations: int
    final_update_norm: float
    final_clearing_residual: float
    converged: bool
    trace: list[tuple[int, float, float]] | None


def _side_scalars(model, num_inside: int) -> np.ndarray:
    if isinstance(model, Logit):
        return np.ones(num_inside)
    if isinstance(model, NestedLogit):
        lam = np.asarray(model.lam, dtype=np.float64)
        return lam[np.asarray(model.nest_of, dtype=np.int64) - 1]
    if isinstance(model, GeneralizedNestedLogit):
        return np.full(num_inside, min(model.lam))
    raise SpecError(f"unsupported choice model type {type(model).__name__}")


def step_scalars(spec) -> StepScalars:
    """Largest per-match step scalars under which the map stays contractive."""
    spec = validate_spec(spec)
    num_workers, num_firms = spec.num_worker_types, spec.num_firm_types
    # Worker side: the relevant alternative of match (x, y) is firm type y,
    # so the scalar varies along columns; symmetrically for the firm side.
    worker = np.broadcast_to(
        _side_scalars(spec.worker_model, num_firms)[None, :], (num_workers, num_firms)
    ).copy()
    firm = np.broadcast_to(
        _side_scalars(spec.firm_model, num_workers)[:, None], (num_workers, num_firms)
    ).copy()
    return StepScalars(worker=worker, firm=firm)


def _check_scalars(spec: ValidatedSpec, scalars: StepScalars) -> StepScalars:
    shape = (spec.num_worker_types, spec.num_firm_types)
    worker = np.asarray(scalars.worker, dtype=np.float64)
    firm = np.asarray(scalars.firm, dtype=np.float64)
    for name, arr in (("worker", worker), ("firm", firm)):
        if arr.shape != shape:
            raise SpecError(f"step scalars ({name}) must have shape {shape}; got {arr.shape}")
        if not np.isfinite(arr).all() or (arr <= 0.0).any() or (arr > 1.0).any():
            raise SpecError(f"step scalars ({name}) must lie in (0, 1]")
    return StepScalars(worker=worker, firm=firm)


def damping(spec, scalars: StepScalars) -> np.ndarray:
    """Per-match damping factors of the fixed-point update.

    Entry (x, y) is

        (c^X sigma^X_x) (c^Y sigma^Y_y)
        -------------------------------------------
        eta^Y_y c^X sigma^X_x + eta^X_x c^Y sigma^Y_y

    which balances the two sides' wage responses so that one unit of excess
    log demand moves the wage by less than the amount that would overshoot
    either side's choice probabilities.
    """
    spec = validate_spec(spec)
    scalars = _check_scalars(spec, scalars)
    worker_weight = scalars.worker * spec.worker_scale[:, None]
    firm_weight = scalars.firm * spec.firm_scale[None, :]
    return worker_weight * firm_weight / (
        spec.firm_wage_sensitivity[None, :] * worker_weight
        + spec.worker_wage_sensitivity[:, None] * firm_weight
    )


def _log_masses(spec: ValidatedSpec) -> tuple[np.ndarray, np.ndarray]:
    return np.log(spec.worker_mass), np.log(spec.firm_mass)


def _update_terms(spec: ValidatedSpec, wages: np.ndarray):
    """Log clearing gap and both sides' log-probabilities at given wages."""
    worker_payoffs, firm_payoffs = scaled_payoffs(spec, wages)
    worker_lp = _side_logprobs(np.ascontiguousarray(worker_payoffs), spec.worker_model)
    firm_lp = _side_logprobs(np.ascontiguousarray(firm_payoffs.T), spec.firm_model).T
    log_nx, log_ny = _log_masses(spec)
    gap = (log_ny[None, :] + firm_lp[1:, :]) - (log_nx[:, None] + worker_lp[:, 1:])
    return gap, worker_lp, firm_lp


def _residual_from_logs(spec: ValidatedSpec, worker_lp, firm_lp) -> float:
    supply = spec.worker_mass[:, None] * np.exp(worker_lp[:, 1:])
    demand = spec.firm_mass[None, :] * np.exp(firm_lp[1:, :])
    return float(np.max(np.abs(supply - demand)))


def _check_finite_update(wages: np.ndarray) -> None:
    if not np.isfinite(wages).all():
        x, y = np.argwhere(~np.isfinite(wages))[0]
        raise NumericsError(
            f"fixed-point update produced a non-finite wage at (x, y) = ({x + 1}, {y + 1})"
        )


def fixed_point_map(spec, wages, scalars: StepScalars | None = None) -> np.ndarray:
    """One damped simultaneous update of the whole wage matrix."""
    spec = validate_spec(spec)
    wages = check_wages(spec, wages)
    if scalars is None:
        scalars = step_scalars(spec)
    factors = damping(spec, scalars)
    gap, _, _ = _update_terms(spec, wages)
    updated = wages + factors * gap
    _check_finite_update(updated)
    return updated


def clearing_residual(spec, wages) -> float:
    """Largest absolute mismatch between worker supply and firm demand."""
    spec = validate_spec(spec)
    wages = check_wages(spec, wages)
    _, worker_lp, firm_lp = _update_terms(spec, wages)
    return _residual_from_logs(spec, worker_lp, firm_lp)


def _initial_wages(spec: ValidatedSpec, options: SolveOptions) -> np.ndarray:
    if options.initial_wages is None:
        return np.zeros((spec.num_worker_types, spec.num_firm_types))
    return check_wages(spec, options.initial_wages).copy()


def _thin_trace(trace_all: list, converged: bool, trace_every: int):
    if not converged:
        return trace_all
    if trace_every == 0:
        return None
    kept = [entry for entry in trace_all if entry[0] % trace_every == 0]
    if not kept or kept[-1][0] != trace_all[-1][0]:
        kept.append(trace_all[-1])
    return kept


def _assemble_result(spec: ValidatedSpec, wages: np.ndarray, iterations: int,
                     last_norm: float, converged: bool, trace_all: list,
                     options: SolveOptions) -> SolveResult:
    worker_lp = worker_logprobs(spec, wages)
    firm_lp = firm_logprobs(spec, wages)
    worker_probs = np.exp(worker_lp)
    firm_probs = np.exp(firm_lp)
    matching = Matching(
        matched=spec.worker_mass[:, None] * worker_probs[:, 1:],
        unmatched_workers=spec.worker_mass * worker_probs[:, 0],
        vacant_firms=spec.firm_mass * firm_probs[0, :],
    )
    wages = wages.copy()
    wages.setflags(write=False)
    return SolveResult(
        wages=wages,
        matching=matching,
        iterations=iterations,
        final_update_norm=last_norm,
        final_clearing_residual=_residual_from_logs(spec, worker_lp, firm_lp),
        converged=converged,
        trace=_thin_trace(trace_all, converged, options.trace_every),
    )


def solve(spec, options: SolveOptions | None = None,
          scalars: StepScalars | None = None) -> SolveResult:
    """Iterate the damped clearing map until the update norm drops below tolerance.

    ``scalars`` overrides the per-model step scalars; the default choice
    guarantees convergence, smaller values only slow it down.
    """
    spec = validate_spec(spec)
    options = options if options is not None else SolveOptions()
    options.check()
    if scalars is None:
        scalars = step_scalars(spec)
    factors = damping(spec, scalars)

    wages = _initial_wages(spec, options)
    trace_all: list[tuple[int, float, float]] = []
    converged = False
    norm = np.inf
    for iteration in range(1, options.max_iterations + 1):
        gap, worker_lp, firm_lp = _update_terms(spec, wages)
        update = factors * gap
        wages = wages + update
        _check_finite_update(wages)
        norm = float(np.max(np.abs(update)))
        trace_all.append((iteration, norm, _residual_from_logs(spec, worker_lp, firm_lp)))
        if norm < options.tolerance:
            converged = True
            break
    return _assemble_result(spec, wages, len(trace_all), norm, converged, trace_all, options)


def _generator_log_terms(payoffs: np.ndarray, generator: GevGenerator):
    """Per-row log gradient (inside slots) and log value of a generator."""
    n, num_inside = payoffs.shape
    log_grad = np.empty((n, num_inside))
    log_value = np.empty(n)
    for r in range(n):
        u = np.concatenate([[1.0], np.exp(payoffs[r])])
        log_value[r] = np.log(generator.value(u))
        with np.errstate(divide="ignore"):
            log_grad[r] = np.log(np.asarray(generator.gradient(u), dtype=np.float64)[1:])
    return log_grad, log_value


def generator_fixed_point_map(spec, wages,
                              worker_generator: GevGenerator | None = None,
                              firm_generator: GevGenerator | None = None) -> np.ndarray:
    """One undamped-scalar update written in generating-function form.

    Substituting p_i = u_i dg/du_i / g into the clearing map with unit step
    scalars gives an update that needs only the generators' values and
    gradients; with the built-in generators it agrees with
    :func:`fixed_point_map` at unit scalars to rounding error.
    """
    spec = validate_spec(spec)
    wages = check_wages(spec, wages)
    if worker_generator is None:
        worker_generator = generator_for(spec.worker_model, spec.num_firm_types)
    if firm_generator is None:
        firm_generator = generator_for(spec.firm_model, spec.num_worker_types)

    unit = StepScalars(
        worker=np.ones_like(wages),
        firm=np.ones_like(wages),
    )
    factors = damping(spec, unit)
    log_nx, log_ny = _log_masses(spec)
    worker_payoffs, firm_payoffs = scaled_payoffs(spec, wages)

    worker_grad, worker_value = _generator_log_terms(worker_payoffs, worker_generator)
    firm_grad, firm_value = _generator_log_terms(firm_payoffs.T, firm_generator)

    # log p^X_xy = v^X_xy + log dg^X - log g^X, and the v terms recombine
    # into the payoff matrices divided by the scales.
    gap = (
        log_ny[None, :]
        + firm_payoffs
        + firm_grad.T
        - firm_value[None, :]
        - log_nx[:, None]
        - worker_payoffs
        - worker_grad
        + worker_value[:, None]
    )
    updated = wages + factors * gap
    _check_finite_update(updated)
    return updated


def solve_via_generators(spec, options: SolveOptions | None = None,
                         worker_generator: GevGenerator | None = None,
                         firm_generator: GevGenerator | None = None) -> SolveResult:
    """Iterate the generating-function form of the clearing map.

    An independent route to the same equilibrium as :func:`solve`; with unit
    step scalars the iteration is only guaranteed to contract when the
    scaled own-elasticities stay below one at scalar 1, which holds for
    logit and for nesting parameters close enough to one.
    """
    spec = validate_spec(spec)
    options = options if options is not None else SolveOptions()
    options.check()
    if worker_generator is None:
        worker_generator = generator_for(spec.worker_model, spec.num_firm_types)
    if firm_generator is None:
        firm_generator = generator_for(spec.firm_model, spec.num_worker_types)

    wages = _initial_wages(spec, options)
    trace_all: list[tuple[int, float, float]] = []
    converged = False
    norm = np.inf
    for iteration in range(1, options.max_iterations + 1):
        residual = clearing_residual(spec, wages)
        updated = generator_fixed_point_map(spec, wages, worker_generator, firm_generator)
        norm = float(np.max(np.abs(updated - wages)))
        wages = updated
        trace_all.append((iteration, norm, residual))
        if norm < options.tolerance:
            converged = True
            break
    return _assemble_result(spec, wages, len(trace_all), norm, converged, trace_all, options)
