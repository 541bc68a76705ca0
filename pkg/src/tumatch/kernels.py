"""Choice probabilities and own-payoff elasticities.

Public entry points accept one payoff vector or a batch of payoff rows over
the inside alternatives; the outside option's payoff is always zero and its
probability comes back in slot 0. All probabilities are computed in log
space and exponentiated at the end, never renormalized, so the sum-to-one
checks in the tests are meaningful.

Own-payoff elasticities here are derivatives of log choice probabilities
with respect to the alternative's own scale-adjusted payoff. All three
models have closed forms; the generalized nested logit one decomposes the
probability over nests, weights each nest's nested-logit expression by the
posterior probability of reaching the alternative through that nest, and
reduces to the nested logit formula for one-hot memberships. A central
finite-difference fallback (:func:`_fd_own_elasticities`) is kept as an
independent route for the tests.

The contraction margins 1 - c * e of the scaled elasticities are exposed
separately because the subtraction cancels catastrophically when a
probability is tiny: expanded per model, every margin is a sum of terms
that are nonnegative under the models' own step scalars, and
:func:`_side_margins` evaluates that expansion directly so margins stay
strictly positive wherever the theory says they are.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from tumatch import _backend
from tumatch.market import (
    GeneralizedNestedLogit,
    Logit,
    NestedLogit,
    check_wages,
    scaled_payoffs,
    validate_choice_model,
    validate_spec,
)

__all__ = [
    "KernelError",
    "ChoiceProbabilities",
    "ElasticityTable",
    "logit_logprobs",
    "logit_probs",
    "nested_logit_logprobs",
    "nested_logit_probs",
    "nested_conditional_logprobs",
    "gnl_logprobs",
    "gnl_probs",
    "worker_logprobs",
    "firm_logprobs",
    "choice_probabilities",
    "own_elasticities",
    "elasticity_margins",
]

# Step for the central finite differences of the elasticity fallback.
FD_STEP = 1e-6


class KernelError(ValueError):
    """A probability kernel received invalid input."""


@dataclass(frozen=True, eq=False)
class ChoiceProbabilities:
    """Match probabilities of both sides at a given wage matrix.

    ``worker[x, 0]`` is the probability that a type-x worker stays out and
    ``worker[x, y]`` that they choose firm type y; ``firm[0, y]`` is the
    probability that a type-y firm leaves its job vacant and ``firm[x, y]``
    that it hires worker type x.
    """

    worker: np.ndarray
    firm: np.ndarray


@dataclass(frozen=True, eq=False)
class ElasticityTable:
    """Own-payoff semi-elasticities of both sides' choice probabilities.

    Shapes match :class:`ChoiceProbabilities`; slot 0 holds the outside
    option. All entries are strictly positive for the supported models.
    """

    worker: np.ndarray
    firm: np.ndarray


def _as_batch(payoffs, name: str = "payoffs") -> tuple[np.ndarray, bool]:
    try:
        arr = np.ascontiguousarray(payoffs, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise KernelError(f"{name} must be numeric") from exc
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] == 0:
        raise KernelError(f"{name} must be a vector or matrix of inside payoffs")
    if not np.isfinite(arr).all():
        raise KernelError(f"{name} must be finite")
    return arr, single


def _unbatch(result: np.ndarray, single: bool) -> np.ndarray:
    return result[0] if single else result


def _nested_arrays(model: NestedLogit) -> tuple[np.ndarray, np.ndarray]:
    nest_index = np.asarray(model.nest_of, dtype=np.int64) - 1
    lam = np.asarray(model.lam, dtype=np.float64)
    return nest_index, lam


def _gnl_arrays(model: GeneralizedNestedLogit) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(divide="ignore"):
        log_weights = np.log(model.membership)
    lam = np.asarray(model.lam, dtype=np.float64)
    return np.ascontiguousarray(log_weights), lam


def logit_logprobs(payoffs) -> np.ndarray:
    """Logit log-probabilities for inside payoffs, outside option in slot 0."""
    arr, single = _as_batch(payoffs)
    return _unbatch(_backend.core().logit_logprobs(arr), single)


def logit_probs(payoffs) -> np.ndarray:
    """Logit choice probabilities for inside payoffs, outside option in slot 0."""
    return np.exp(logit_logprobs(payoffs))


def nested_logit_logprobs(payoffs, nest_of, lam) -> np.ndarray:
    """Nested logit log-probabilities, outside option in slot 0.

    ``nest_of`` assigns each inside alternative a 1-based nest id and
    ``lam`` holds the per-nest nesting parameters in (0, 1].
    """
    arr, single = _as_batch(payoffs)
    model = validate_choice_model(NestedLogit(nest_of, lam), arr.shape[1], "nested logit")
    nest_index, lam_arr = _nested_arrays(model)
    return _unbatch(_backend.core().nested_logprobs(arr, nest_index, lam_arr), single)


def nested_logit_probs(payoffs, nest_of, lam) -> np.ndarray:
    """Nested logit choice probabilities, outside option in slot 0."""
    return np.exp(nested_logit_logprobs(payoffs, nest_of, lam))


def nested_conditional_logprobs(payoffs, nest_of, lam) -> np.ndarray:
    """Log-probabilities of each inside alternative conditional on its nest.

    Slot j holds log P(alternative j + 1 | its nest is chosen); there is no
    outside slot because the outside option is alone in its nest.
    """
    arr, single = _as_batch(payoffs)
    model = validate_choice_model(NestedLogit(nest_of, lam), arr.shape[1], "nested logit")
    nest_index, lam_arr = _nested_arrays(model)
    return _unbatch(_backend.core().nested_cond_logprobs(arr, nest_index, lam_arr), single)


def gnl_logprobs(payoffs, membership, lam) -> np.ndarray:
    """Generalized nested logit log-probabilities, outside option in slot 0.

    ``membership`` is the (J, K) matrix of fractional nest weights with rows
    summing to one; ``lam`` holds the K nesting parameters in (0, 1].
    """
    arr, single = _as_batch(payoffs)
    model = validate_choice_model(
        GeneralizedNestedLogit(membership, lam), arr.shape[1], "generalized nested logit"
    )
    log_weights, lam_arr = _gnl_arrays(model)
    return _unbatch(_backend.core().gnl_logprobs(arr, log_weights, lam_arr), single)


def gnl_probs(payoffs, membership, lam) -> np.ndarray:
    """Generalized nested logit choice probabilities, outside option in slot 0."""
    return np.exp(gnl_logprobs(payoffs, membership, lam))


def _side_logprobs(payoffs: np.ndarray, model) -> np.ndarray:
    """Log-probabilities of one side's validated model on scaled payoff rows."""
    core = _backend.core()
    if isinstance(model, Logit):
        return core.logit_logprobs(payoffs)
    if isinstance(model, NestedLogit):
        nest_index, lam = _nested_arrays(model)
        return core.nested_logprobs(payoffs, nest_index, lam)
    nest_weights, lam = _gnl_arrays(model)
    return core.gnl_logprobs(payoffs, nest_weights, lam)


def worker_logprobs(spec, wages) -> np.ndarray:
    """Worker-side log choice probabilities at a wage matrix.

    Returns an (X, Y + 1) matrix with the outside option in column 0.
    """
    spec = validate_spec(spec)
    worker_payoffs, _ = scaled_payoffs(spec, wages)
    return _side_logprobs(np.ascontiguousarray(worker_payoffs), spec.worker_model)


def firm_logprobs(spec, wages) -> np.ndarray:
    """Firm-side log choice probabilities at a wage matrix.

    Returns an (X + 1, Y) matrix with the outside option in row 0: each
    column is one firm type's choice problem over worker types.
    """
    spec = validate_spec(spec)
    _, firm_payoffs = scaled_payoffs(spec, wages)
    return _side_logprobs(np.ascontiguousarray(firm_payoffs.T), spec.firm_model).T


def choice_probabilities(spec, wages) -> ChoiceProbabilities:
    """Match probabilities of both sides at a wage matrix."""
    spec = validate_spec(spec)
    wages = check_wages(spec, wages)
    return ChoiceProbabilities(
        worker=np.exp(worker_logprobs(spec, wages)),
        firm=np.exp(firm_logprobs(spec, wages)),
    )


def _gnl_posterior(payoffs: np.ndarray, log_weights: np.ndarray,
                   lam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior nest weights and within-nest conditionals, per alternative.

    ``q[r, j, k]`` is the probability that alternative j was reached through
    nest k given that it was chosen (rows of q over k sum to one), and
    ``cond[r, j, k]`` the probability of alternative j conditional on nest k
    being entered; both are zero wherever the membership weight is.
    """
    with np.errstate(invalid="ignore"):
        scaled = payoffs[:, :, None] / lam[None, None, :] + log_weights[None, :, :]
        incl = logsumexp(scaled, axis=1)
        finite = np.isfinite(scaled)
        cond = np.where(finite, np.exp(scaled - incl[:, None, :]), 0.0)
        post = scaled + (lam - 1.0)[None, None, :] * incl[:, None, :]
        post = np.where(finite, post, -np.inf)
        q = np.exp(post - logsumexp(post, axis=2, keepdims=True))
    return q, cond


def _fd_own_elasticities(payoffs: np.ndarray, log_weights: np.ndarray,
                         lam: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Finite-difference elasticities of the generalized nested logit.

    Independent of the closed form: central differences of the
    log-probability kernel, with the outside option's own derivative
    recovered from translation invariance (shifting every payoff equally
    leaves probabilities unchanged, so each row of cross-derivatives sums
    to zero). Used by the tests to certify the closed form.
    """
    core = _backend.core()
    n, num_inside = payoffs.shape
    own = np.empty((n, num_inside))
    outside_cross = np.empty((n, num_inside))
    for j in range(num_inside):
        up = payoffs.copy()
        up[:, j] += step
        down = payoffs.copy()
        down[:, j] -= step
        high = core.gnl_logprobs(up, log_weights, lam)
        low = core.gnl_logprobs(down, log_weights, lam)
        own[:, j] = (high[:, j + 1] - low[:, j + 1]) / (2.0 * step)
        outside_cross[:, j] = (high[:, 0] - low[:, 0]) / (2.0 * step)
    outside = -outside_cross.sum(axis=1)
    return np.concatenate([outside[:, None], own], axis=1)


def _side_elasticities(payoffs: np.ndarray, model) -> np.ndarray:
    core = _backend.core()
    if isinstance(model, Logit):
        return 1.0 - np.exp(core.logit_logprobs(payoffs))
    if isinstance(model, NestedLogit):
        nest_index, lam = _nested_arrays(model)
        probs = np.exp(core.nested_logprobs(payoffs, nest_index, lam))
        cond = np.exp(core.nested_cond_logprobs(payoffs, nest_index, lam))
        lam_j = lam[nest_index]
        inside = 1.0 / lam_j - (1.0 - lam_j) / lam_j * cond - probs[:, 1:]
        outside = 1.0 - probs[:, :1]
        return np.concatenate([outside, inside], axis=1)
    log_weights, lam = _gnl_arrays(model)
    probs = np.exp(core.gnl_logprobs(payoffs, log_weights, lam))
    q, cond = _gnl_posterior(payoffs, log_weights, lam)
    # Averaging the per-nest nested-logit expressions with the posterior
    # weights q generalizes the nested formula above; the outside option is
    # alone in a unit-parameter nest, so its elasticity is logit-like.
    inverse_lam = (q / lam[None, None, :]).sum(axis=2)
    within = (q * cond * ((1.0 - lam) / lam)[None, None, :]).sum(axis=2)
    inside = inverse_lam - within - probs[:, 1:]
    outside = 1.0 - probs[:, :1]
    return np.concatenate([outside, inside], axis=1)


def own_elasticities(spec, wages) -> ElasticityTable:
    """Own-payoff semi-elasticities of both sides at a wage matrix.

    Entry (x, y) of the worker table is d log p^X_xy / d v_xy where v is the
    worker's scale-adjusted payoff at that match, and analogously for firms;
    slot 0 covers the outside options.
    """
    spec = validate_spec(spec)
    worker_payoffs, firm_payoffs = scaled_payoffs(spec, wages)
    worker = _side_elasticities(np.ascontiguousarray(worker_payoffs), spec.worker_model)
    firm = _side_elasticities(np.ascontiguousarray(firm_payoffs.T), spec.firm_model).T
    return ElasticityTable(worker=worker, firm=firm)


def _side_margins(payoffs: np.ndarray, model, scalars: np.ndarray) -> np.ndarray:
    """Margins 1 - c * e of one side's scaled own-elasticities, expanded.

    ``scalars`` holds the per-alternative step scalars c; the outside option
    always carries scalar 1, so its margin is its choice probability. The
    inside margins are evaluated in expanded form — e.g. for an alternative
    of a nest with parameter l, 1 - c/l + c (1-l)/l cond + c p — because the
    raw subtraction 1 - c * e rounds to zero or below once the probabilities
    fall under machine epsilon, while every expanded term is nonnegative
    whenever c stays within the model's own scalar rule.
    """
    core = _backend.core()
    if isinstance(model, Logit):
        probs = np.exp(core.logit_logprobs(payoffs))
        inside = (1.0 - scalars) + scalars * probs[:, 1:]
        return np.concatenate([probs[:, :1], inside], axis=1)
    if isinstance(model, NestedLogit):
        nest_index, lam = _nested_arrays(model)
        probs = np.exp(core.nested_logprobs(payoffs, nest_index, lam))
        cond = np.exp(core.nested_cond_logprobs(payoffs, nest_index, lam))
        lam_j = lam[nest_index]
        inside = (
            (1.0 - scalars / lam_j)
            + scalars * ((1.0 - lam_j) / lam_j) * cond
            + scalars * probs[:, 1:]
        )
        return np.concatenate([probs[:, :1], inside], axis=1)
    log_weights, lam = _gnl_arrays(model)
    probs = np.exp(core.gnl_logprobs(payoffs, log_weights, lam))
    q, cond = _gnl_posterior(payoffs, log_weights, lam)
    slack = (q * (1.0 - scalars[:, :, None] / lam[None, None, :])).sum(axis=2)
    within = (q * cond * ((1.0 - lam) / lam)[None, None, :]).sum(axis=2)
    inside = slack + scalars * within + scalars * probs[:, 1:]
    return np.concatenate([probs[:, :1], inside], axis=1)


def elasticity_margins(spec, wages, worker_scalars, firm_scalars):
    """Margins 1 - c * e of both sides' scaled own-elasticities.

    ``worker_scalars`` and ``firm_scalars`` are (X, Y) matrices of step
    scalars for the inside alternatives; outside options carry scalar 1.
    Returns the worker (X, Y + 1) and firm (X + 1, Y) margin tables with the
    outside slots first, computed in a cancellation-free expansion so that
    positivity survives even where choice probabilities underflow.
    """
    spec = validate_spec(spec)
    worker_payoffs, firm_payoffs = scaled_payoffs(spec, wages)
    worker_c = np.asarray(worker_scalars, dtype=np.float64)
    firm_c = np.asarray(firm_scalars, dtype=np.float64)
    worker = _side_margins(
        np.ascontiguousarray(worker_payoffs), spec.worker_model, worker_c
    )
    firm = _side_margins(
        np.ascontiguousarray(firm_payoffs.T), spec.firm_model,
        np.ascontiguousarray(firm_c.T),
    ).T
    return worker, firm
