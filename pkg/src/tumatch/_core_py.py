"""NumPy reference implementations of the batched log-probability kernels.

Each function takes an (n, J) float64 matrix whose rows are independent
choice problems over J inside alternatives; the outside option's payoff is
pinned at zero. Results are log-probabilities with the outside option in
column 0 and inside alternative j in column j. Everything is computed in
log space with max-shifted log-sum-exp, so payoffs of large magnitude do
not overflow. The optional compiled backend mirrors these signatures.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp


def logit_logprobs(payoffs: np.ndarray) -> np.ndarray:
    """Multinomial logit log-probabilities, outside option in column 0."""
    n = payoffs.shape[0]
    z = np.concatenate([np.zeros((n, 1)), payoffs], axis=1)
    return z - logsumexp(z, axis=1, keepdims=True)


def _inclusive_values(scaled: np.ndarray, nest_index: np.ndarray, num_nests: int) -> np.ndarray:
    incl = np.empty((scaled.shape[0], num_nests))
    for k in range(num_nests):
        incl[:, k] = logsumexp(scaled[:, nest_index == k], axis=1)
    return incl


def nested_logprobs(payoffs: np.ndarray, nest_index: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Nested logit log-probabilities, outside option in column 0.

    ``nest_index`` holds the 0-based nest of each inside alternative and
    ``lam`` the nesting parameter of each nest; the outside option sits in
    its own degenerate nest.
    """
    n = payoffs.shape[0]
    lam_j = lam[nest_index]
    scaled = payoffs / lam_j
    incl = _inclusive_values(scaled, nest_index, lam.shape[0])
    log_denom = logsumexp(
        np.concatenate([np.zeros((n, 1)), lam * incl], axis=1), axis=1, keepdims=True
    )
    inside = scaled + (lam_j - 1.0) * incl[:, nest_index] - log_denom
    return np.concatenate([-log_denom, inside], axis=1)


def nested_cond_logprobs(payoffs: np.ndarray, nest_index: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Log-probabilities of each inside alternative conditional on its nest."""
    scaled = payoffs / lam[nest_index]
    incl = _inclusive_values(scaled, nest_index, lam.shape[0])
    return scaled - incl[:, nest_index]


def gnl_logprobs(payoffs: np.ndarray, log_weights: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Generalized nested logit log-probabilities, outside option in column 0.

    ``log_weights`` is the (J, K) elementwise log of the membership matrix,
    with -inf marking zero memberships; those terms drop out of every
    log-sum-exp below. ``lam`` holds the K nesting parameters.
    """
    n = payoffs.shape[0]
    with np.errstate(invalid="ignore"):
        # scaled[r, j, k] = log alpha_jk + v_rj / lam_k; -inf where alpha_jk = 0
        scaled = payoffs[:, :, None] / lam[None, None, :] + log_weights[None, :, :]
        incl = logsumexp(scaled, axis=1)
        log_denom = logsumexp(
            np.concatenate([np.zeros((n, 1)), lam[None, :] * incl], axis=1),
            axis=1,
            keepdims=True,
        )
        # (lam - 1) * incl is 0 * -inf = nan when lam_k = 1 and nest k is
        # empty; those slots are -inf in `scaled` and are masked back below.
        contrib = scaled + (lam - 1.0)[None, None, :] * incl[:, None, :]
        contrib = np.where(np.isfinite(scaled), contrib, -np.inf)
        inside = logsumexp(contrib, axis=2) - log_denom
    return np.concatenate([-log_denom, inside], axis=1)
