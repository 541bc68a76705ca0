"""Slow independent checks of the probability kernels and the solver.

Two routes that share no algebra with the code they certify:

* Monte Carlo simulation of the logit choice problem. Taste shocks are
  drawn as standard type-1 extreme values via the inverse CDF
  -log(-log(u)) from a seeded NumPy ``default_rng`` (the PCG64 generator;
  fixed here so that reports reproduce bit for bit), each simulated agent
  picks its best alternative, and the resulting frequencies are compared
  against the closed-form probabilities. With n draws the frequency of any
  alternative deviates from its probability by more than 4 * sqrt(0.25/n)
  with probability under 1e-4.

* Brute-force equilibrium search. Market clearing is solved one wage at a
  time: the clearing gap of a single match is strictly decreasing in its
  own wage, so each coordinate is driven to zero by bisection, and sweeps
  over the coordinates repeat until the full residual is below tolerance.
  No damping, no fixed-point algebra. Deliberately restricted to tiny
  markets; it exists to certify the fast solver, not to replace it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tumatch.kernels import KernelError, firm_logprobs, logit_probs, worker_logprobs
from tumatch.market import validate_spec
from tumatch.solver import clearing_residual

__all__ = [
    "OracleError",
    "McReport",
    "mc_logit_probs",
    "brute_force_equilibrium",
]

# Draws are simulated in fixed-size blocks; the block size never affects
# the stream of random numbers, only peak memory.
_BLOCK = 1 << 18

# Largest |X| * |Y| the coordinate search accepts.
_MAX_BRUTE_CELLS = 4

# Bisection brackets start this wide around the current wage and double
# until they straddle the root, up to this many expansions.
_BRACKET_START = 1.0
_MAX_BRACKET_DOUBLINGS = 60

_MAX_SWEEPS = 10000


class OracleError(RuntimeError):
    """An oracle could not produce its certificate."""


@dataclass(frozen=True, eq=False)
class McReport:
    """Monte Carlo frequencies against closed-form logit probabilities.

    ``empirical_probs`` is ``counts / draws`` with the outside option in
    slot 0; ``max_abs_gap`` compares it to ``closed_form_probs`` and
    ``standard_error_bound`` is the 4-sigma binomial envelope the gap is
    expected to stay inside.
    """

    empirical_probs: np.ndarray
    closed_form_probs: np.ndarray
    counts: np.ndarray
    draws: int
    seed: int
    max_abs_gap: float
    standard_error_bound: float

    @property
    def ok(self) -> bool:
        return self.max_abs_gap < self.standard_error_bound


def mc_logit_probs(payoffs, draws: int, seed: int = 0) -> McReport:
    """Simulate the logit choice problem and compare with the closed form.

    ``payoffs`` is the vector of inside payoffs (the outside option's payoff
    is zero). ``draws`` independent agents each receive extreme-value taste
    shocks on every alternative and pick the best one.
    """
    v = np.asarray(payoffs, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] == 0:
        raise KernelError("payoffs must be a nonempty vector")
    if not np.isfinite(v).all():
        raise KernelError("payoffs must be finite")
    if draws < 1:
        raise OracleError(f"draws must be >= 1; got {draws}")

    full = np.concatenate([[0.0], v])
    num_alternatives = full.shape[0]
    rng = np.random.default_rng(seed)
    counts = np.zeros(num_alternatives, dtype=np.int64)
    remaining = draws
    while remaining > 0:
        block = min(_BLOCK, remaining)
        uniforms = rng.random((block, num_alternatives))
        with np.errstate(divide="ignore"):
            shocks = -np.log(-np.log(uniforms))
        winners = np.argmax(full[None, :] + shocks, axis=1)
        counts += np.bincount(winners, minlength=num_alternatives)
        remaining -= block

    empirical = counts / draws
    closed = logit_probs(v)
    return McReport(
        empirical_probs=empirical,
        closed_form_probs=closed,
        counts=counts,
        draws=draws,
        seed=seed,
        max_abs_gap=float(np.max(np.abs(empirical - closed))),
        standard_error_bound=4.0 * float(np.sqrt(0.25 / draws)),
    )


def _entry_gap(spec, wages: np.ndarray, x: int, y: int, log_nx, log_ny) -> float:
    """Log demand minus log supply for match (x, y), decreasing in its wage."""
    worker_lp = worker_logprobs(spec, wages)[x, y + 1]
    firm_lp = firm_logprobs(spec, wages)[x + 1, y]
    return (log_ny[y] + firm_lp) - (log_nx[x] + worker_lp)


def brute_force_equilibrium(spec, tolerance: float = 1e-10) -> np.ndarray:
    """Equilibrium wages of a tiny market by coordinate-wise bisection.

    Cycles through the match types, each time bisecting that match's wage
    until its own clearing gap changes sign within machine precision, and
    stops when the full clearing residual drops below ``tolerance``.
    """
    spec = validate_spec(spec)
    num_workers, num_firms = spec.num_worker_types, spec.num_firm_types
    if num_workers * num_firms > _MAX_BRUTE_CELLS:
        raise OracleError(
            f"coordinate search is limited to markets with at most {_MAX_BRUTE_CELLS} "
            f"match types; got {num_workers * num_firms}"
        )
    log_nx = np.log(spec.worker_mass)
    log_ny = np.log(spec.firm_mass)
    wages = np.zeros((num_workers, num_firms))

    for _ in range(_MAX_SWEEPS):
        for x in range(num_workers):
            for y in range(num_firms):
                wages[x, y] = _clear_entry(spec, wages, x, y, log_nx, log_ny)
        if clearing_residual(spec, wages) < tolerance:
            return wages
    raise OracleError(
        f"coordinate search did not reach residual {tolerance!r} "
        f"within {_MAX_SWEEPS} sweeps"
    )


def _clear_entry(spec, wages: np.ndarray, x: int, y: int, log_nx, log_ny) -> float:
    center = wages[x, y]
    trial = wages.copy()

    def gap(w: float) -> float:
        trial[x, y] = w
        return _entry_gap(spec, trial, x, y, log_nx, log_ny)

    # Widen the bracket until the decreasing gap straddles zero.
    span = _BRACKET_START
    low, high = center - span, center + span
    for _ in range(_MAX_BRACKET_DOUBLINGS):
        if gap(low) > 0.0:
            break
        span *= 2.0
        low = center - span
    else:
        raise OracleError(f"no lower bracket for match ({x + 1}, {y + 1})")
    span = _BRACKET_START
    for _ in range(_MAX_BRACKET_DOUBLINGS):
        if gap(high) < 0.0:
            break
        span *= 2.0
        high = center + span
    else:
        raise OracleError(f"no upper bracket for match ({x + 1}, {y + 1})")

    while high - low > 1e-13 * max(1.0, abs(low), abs(high)):
        mid = 0.5 * (low + high)
        if gap(mid) > 0.0:
            low = mid
        else:
            high = mid
    return 0.5 * (low + high)
