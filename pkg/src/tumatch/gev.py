"""Generating-function form of the extreme-value choice models.

Every model in this package belongs to the family whose choice
probabilities can be written

    p_i = u_i * dg/du_i(u) / g(u),      u_i = exp(payoff_i),

for a generating function g that is positive, degree-1 homogeneous, and
increasing in each coordinate. This module carries the generators of the
logit, nested logit, and generalized nested logit and evaluates the display
above directly. It is an independent route to the same probabilities as the
closed-form kernels and is cross-checked against them in the tests; the
probabilities are not renormalized, so their summing to one is itself a
property of the generator (Euler's identity for homogeneous functions).

Component 0 of the generator's argument is the outside option, whose payoff
is zero (u_0 = 1).
"""

from __future__ import annotations

import abc

import numpy as np

from tumatch.kernels import KernelError
from tumatch.market import (
    GeneralizedNestedLogit,
    Logit,
    NestedLogit,
    validate_choice_model,
)

__all__ = [
    "GevGenerator",
    "LogitGenerator",
    "NestedLogitGenerator",
    "GnlGenerator",
    "generator_for",
    "gev_logprobs",
    "gev_probs",
    "verify_generator",
]


class GevGenerator(abc.ABC):
    """A positive, degree-1 homogeneous, coordinatewise increasing function.

    ``value`` and ``gradient`` take a strictly positive vector u over the
    full choice set, outside option first.
    """

    @abc.abstractmethod
    def value(self, u: np.ndarray) -> float:
        """g(u)."""

    @abc.abstractmethod
    def gradient(self, u: np.ndarray) -> np.ndarray:
        """Elementwise partial derivatives dg/du_i(u)."""


class LogitGenerator(GevGenerator):
    """g(u) = sum_i u_i, generating the multinomial logit."""

    def value(self, u: np.ndarray) -> float:
        return float(np.sum(u))

    def gradient(self, u: np.ndarray) -> np.ndarray:
        return np.ones_like(u)


class NestedLogitGenerator(GevGenerator):
    """g(u) = u_0 + sum_k (sum_{i in nest k} u_i^(1/lam_k))^lam_k."""

    def __init__(self, nest_of, lam):
        model = validate_choice_model(NestedLogit(nest_of, lam), len(nest_of), "nested logit")
        self._nest_index = np.asarray(model.nest_of, dtype=np.int64) - 1
        self._lam = np.asarray(model.lam, dtype=np.float64)

    def value(self, u: np.ndarray) -> float:
        inside = u[1:]
        total = float(u[0])
        for k, lam_k in enumerate(self._lam):
            total += float(np.sum(inside[self._nest_index == k] ** (1.0 / lam_k)) ** lam_k)
        return total

    def gradient(self, u: np.ndarray) -> np.ndarray:
        grad = np.empty_like(u)
        grad[0] = 1.0
        inside = u[1:]
        for k, lam_k in enumerate(self._lam):
            members = self._nest_index == k
            nest_sum = np.sum(inside[members] ** (1.0 / lam_k))
            grad[1:][members] = inside[members] ** (1.0 / lam_k - 1.0) * \
                nest_sum ** (lam_k - 1.0)
        return grad


class GnlGenerator(GevGenerator):
    """g(u) = u_0 + sum_k (sum_i alpha_ik u_i^(1/lam_k))^lam_k."""

    def __init__(self, membership, lam):
        num_inside = np.asarray(membership).shape[0]
        model = validate_choice_model(
            GeneralizedNestedLogit(membership, lam), num_inside, "generalized nested logit"
        )
        self._membership = model.membership
        self._lam = np.asarray(model.lam, dtype=np.float64)

    def value(self, u: np.ndarray) -> float:
        inside = u[1:]
        total = float(u[0])
        for k, lam_k in enumerate(self._lam):
            total += float(np.sum(self._membership[:, k] * inside ** (1.0 / lam_k)) ** lam_k)
        return total

    def gradient(self, u: np.ndarray) -> np.ndarray:
        grad = np.zeros_like(u)
        grad[0] = 1.0
        inside = u[1:]
        for k, lam_k in enumerate(self._lam):
            nest_sum = np.sum(self._membership[:, k] * inside ** (1.0 / lam_k))
            if nest_sum == 0.0:
                # Nest with no member weight contributes nothing.
                continue
            grad[1:] += self._membership[:, k] * inside ** (1.0 / lam_k - 1.0) * \
                nest_sum ** (lam_k - 1.0)
        return grad


def generator_for(model, num_inside: int) -> GevGenerator:
    """The generating function of a validated choice model."""
    model = validate_choice_model(model, num_inside, "model")
    if isinstance(model, Logit):
        return LogitGenerator()
    if isinstance(model, NestedLogit):
        return NestedLogitGenerator(model.nest_of, model.lam)
    return GnlGenerator(model.membership, model.lam)


def gev_logprobs(generator: GevGenerator, payoffs) -> np.ndarray:
    """Log choice probabilities from a generating function.

    ``payoffs`` is the vector of inside payoffs; the result has the outside
    option in slot 0. The generator's value and gradient are checked to be
    finite and strictly positive at the evaluation point.
    """
    v = np.asarray(payoffs, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] == 0:
        raise KernelError("payoffs must be a nonempty vector")
    if not np.isfinite(v).all():
        raise KernelError("payoffs must be finite")
    u = np.concatenate([[1.0], np.exp(v)])
    g = float(generator.value(u))
    if not np.isfinite(g) or g <= 0.0:
        raise KernelError(f"generator value must be finite and > 0; got {g!r}")
    grad = np.asarray(generator.gradient(u), dtype=np.float64)
    if grad.shape != u.shape:
        raise KernelError(f"generator gradient must have shape {u.shape}; got {grad.shape}")
    if not np.isfinite(grad).all() or (grad <= 0.0).any():
        raise KernelError("generator gradient must be finite and > 0")
    log_u = np.concatenate([[0.0], v])
    return np.log(grad) + log_u - np.log(g)


def gev_probs(generator: GevGenerator, payoffs) -> np.ndarray:
    """Choice probabilities from a generating function, not renormalized."""
    return np.exp(gev_logprobs(generator, payoffs))


def verify_generator(generator: GevGenerator, num_inside: int,
                     samples: int = 25, seed: int = 0, rtol: float = 1e-9) -> None:
    """Numerically spot-check homogeneity and monotonicity of a generator.

    Draws random positive points u and scalings c and requires
    |g(c u) - c g(u)| <= rtol * c g(u) along with a strictly positive
    gradient. Raises :class:`KernelError` on the first violation.
    """
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        u = rng.uniform(0.05, 20.0, size=num_inside + 1)
        c = rng.uniform(0.1, 10.0)
        base = generator.value(u)
        scaled = generator.value(c * u)
        if not np.isfinite(base) or base <= 0.0:
            raise KernelError(f"generator value must be finite and > 0; got {base!r}")
        if abs(scaled - c * base) > rtol * abs(c * base):
            raise KernelError(
                f"generator is not degree-1 homogeneous: g({c!r} u) = {scaled!r} "
                f"but {c!r} g(u) = {c * base!r}"
            )
        grad = np.asarray(generator.gradient(u), dtype=np.float64)
        if not np.isfinite(grad).all() or (grad <= 0.0).any():
            raise KernelError("generator gradient must be finite and > 0")
