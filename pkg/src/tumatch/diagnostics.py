"""Numerical certificates that the clearing map contracts.

Three independent views of the same property:

* a central finite-difference Jacobian of the fixed-point map, whose
  infinity norm below one certifies local contraction;
* sampled ratios |F(W1) - F(W2)| / |W1 - W2|, certifying it globally
  between concrete points;
* the margins 1 - c * e of the scaled own-elasticities, the analytic
  sufficient condition the damping construction relies on.

Wage matrices are flattened row-major (worker type outer, firm type inner)
wherever a vectorized view is needed, so column x * Y + y of the Jacobian
differentiates with respect to the wage of match (x + 1, y + 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tumatch.kernels import ElasticityTable, elasticity_margins, own_elasticities
from tumatch.market import check_wages, validate_spec
from tumatch.solver import StepScalars, fixed_point_map, step_scalars

__all__ = [
    "BoundedElasticityCheck",
    "DiagnosticsReport",
    "jacobian_fd",
    "infinity_norm",
    "contraction_ratio",
    "check_bounded_elasticities",
    "trace_reduction_rate",
    "diagnostics_report",
]

# Step for the central finite differences behind the Jacobian.
JACOBIAN_FD_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class BoundedElasticityCheck:
    """Margins 1 - c * e of the scaled own-elasticities, per side.

    ``worker_margin[x, 0]`` covers worker type x's outside option (where the
    scalar is 1) and ``worker_margin[x, y]`` the match with firm type y;
    ``firm_margin`` is laid out symmetrically with the outside row first.
    ``ok`` states whether every margin is strictly positive, the sufficient
    condition for the damped map to contract.
    """

    worker_margin: np.ndarray
    firm_margin: np.ndarray
    ok: bool


@dataclass(frozen=True, eq=False)
class DiagnosticsReport:
    """Contraction evidence for one market at one wage matrix."""

    jacobian_inf_norm: float
    contraction_ratio_samples: np.ndarray
    elasticities: ElasticityTable
    elasticity_check: BoundedElasticityCheck
    scalars: StepScalars


def jacobian_fd(spec, wages, step: float = JACOBIAN_FD_STEP,
                scalars: StepScalars | None = None) -> np.ndarray:
    """Central finite-difference Jacobian of the fixed-point map.

    Returns an (X * Y, X * Y) matrix over the row-major vectorization of the
    wage matrix.
    """
    spec = validate_spec(spec)
    wages = check_wages(spec, wages)
    if scalars is None:
        scalars = step_scalars(spec)
    num_workers, num_firms = wages.shape
    size = num_workers * num_firms
    jac = np.empty((size, size))
    for col, (x, y) in enumerate(np.ndindex(num_workers, num_firms)):
        up = wages.copy()
        up[x, y] += step
        down = wages.copy()
        down[x, y] -= step
        diff = fixed_point_map(spec, up, scalars) - fixed_point_map(spec, down, scalars)
        jac[:, col] = diff.ravel() / (2.0 * step)
    return jac


def infinity_norm(matrix) -> float:
    """Maximum absolute row sum of a matrix."""
    arr = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    return float(np.abs(arr).sum(axis=1).max())


def contraction_ratio(spec, wages_a, wages_b,
                      scalars: StepScalars | None = None) -> float:
    """Ratio of image distance to argument distance under the fixed-point map.

    Distances are supremum norms over the wage entries. The two wage
    matrices must differ.
    """
    spec = validate_spec(spec)
    wages_a = check_wages(spec, wages_a)
    wages_b = check_wages(spec, wages_b)
    denom = float(np.max(np.abs(wages_a - wages_b)))
    if denom == 0.0:
        raise ValueError("wage matrices must differ")
    if scalars is None:
        scalars = step_scalars(spec)
    image_a = fixed_point_map(spec, wages_a, scalars)
    image_b = fixed_point_map(spec, wages_b, scalars)
    return float(np.max(np.abs(image_a - image_b))) / denom


def check_bounded_elasticities(spec, wages,
                               scalars: StepScalars | None = None) -> BoundedElasticityCheck:
    """Margins of the analytic contraction condition at one wage matrix.

    The margins come from the cancellation-free expansion in
    :func:`tumatch.kernels.elasticity_margins`, so under the models' own
    step scalars they are strictly positive at every wage matrix, even
    where choice probabilities underflow; forcing larger scalars surfaces
    genuine violations as negative entries of order one.
    """
    spec = validate_spec(spec)
    wages = check_wages(spec, wages)
    if scalars is None:
        scalars = step_scalars(spec)
    worker_margin, firm_margin = elasticity_margins(
        spec, wages, scalars.worker, scalars.firm
    )
    ok = bool((worker_margin > 0.0).all() and (firm_margin > 0.0).all())
    return BoundedElasticityCheck(
        worker_margin=worker_margin, firm_margin=firm_margin, ok=ok
    )


def trace_reduction_rate(trace, window: int = 10, floor: float = 1e-12) -> float:
    """Observed per-iteration error reduction near the end of a solve trace.

    Geometric mean of the last ``window`` consecutive update-norm ratios
    whose norms both exceed ``floor`` (ratios between norms at the rounding
    level say nothing about the map). Returns nan when no ratio qualifies.
    """
    norms = [entry[1] for entry in trace]
    ratios = [
        later / earlier
        for earlier, later in zip(norms, norms[1:])
        if earlier > floor and later > floor
    ]
    tail = ratios[-window:]
    if not tail:
        return float("nan")
    return float(math.exp(np.mean(np.log(tail))))


def diagnostics_report(spec, wages=None, samples: int = 100, seed: int = 0,
                       step: float = JACOBIAN_FD_STEP) -> DiagnosticsReport:
    """Bundle of contraction evidence at one wage matrix.

    The Jacobian, elasticities, and margins are evaluated at ``wages``
    (zeros by default); the contraction ratios are sampled at ``samples``
    independent pairs of wage matrices with entries uniform on [-10, 10],
    drawn from a generator seeded with ``seed``.
    """
    spec = validate_spec(spec)
    shape = (spec.num_worker_types, spec.num_firm_types)
    wages = np.zeros(shape) if wages is None else check_wages(spec, wages)
    scalars = step_scalars(spec)

    jac_norm = infinity_norm(jacobian_fd(spec, wages, step, scalars))
    rng = np.random.default_rng(seed)
    ratios = np.empty(samples)
    for i in range(samples):
        first = rng.uniform(-10.0, 10.0, size=shape)
        second = rng.uniform(-10.0, 10.0, size=shape)
        ratios[i] = contraction_ratio(spec, first, second, scalars)
    return DiagnosticsReport(
        jacobian_inf_norm=jac_norm,
        contraction_ratio_samples=ratios,
        elasticities=own_elasticities(spec, wages),
        elasticity_check=check_bounded_elasticities(spec, wages, scalars),
        scalars=scalars,
    )
