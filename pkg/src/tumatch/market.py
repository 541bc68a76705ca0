"""Market primitives: populations, payoffs, scales, and choice structures.

A market couples two finite populations. Worker types x = 1..X choose among
firm types y = 1..Y and an outside option (not working); firm types choose
among worker types and an outside option (not hiring). Index 0 on either
side always denotes the outside option, whose deterministic payoff is zero.

Arrays are stored 0-based: entry [x-1, y-1] of a matrix refers to worker
type x and firm type y. Error messages use the 1-based type numbering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "SpecError",
    "Logit",
    "NestedLogit",
    "GeneralizedNestedLogit",
    "ChoiceModel",
    "MarketSpec",
    "ValidatedSpec",
    "validate_choice_model",
    "validate_spec",
    "check_wages",
    "scaled_payoffs",
]

# Tolerance on generalized-nested-logit membership row sums before rejecting.
MEMBERSHIP_ROW_TOL = 1e-9


class SpecError(ValueError):
    """A market specification violates one of its invariants."""


@dataclass(frozen=True)
class Logit:
    """Independent extreme-value taste shocks; no structural parameters."""


@dataclass(frozen=True)
class NestedLogit:
    """Hard partition of the inside alternatives into correlated nests.

    ``nest_of[i]`` is the 1-based nest containing inside alternative i + 1;
    nests are numbered 1..K and every nest must be non-empty. The outside
    option implicitly forms its own degenerate nest. ``lam[k]`` is the
    nesting parameter of nest k + 1, in (0, 1]; lam identically 1 recovers
    the plain logit.
    """

    nest_of: tuple[int, ...]
    lam: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "nest_of", tuple(int(v) for v in self.nest_of))
        object.__setattr__(self, "lam", tuple(float(v) for v in self.lam))


@dataclass(frozen=True, eq=False)
class GeneralizedNestedLogit:
    """Fractional nest memberships over the inside alternatives.

    ``membership[i, k]`` is the weight with which inside alternative i + 1
    belongs to nest k + 1; weights are nonnegative and each row must sum to
    one. ``lam[k]`` is the nesting parameter of nest k + 1, in (0, 1]. A
    one-hot membership matrix reproduces the nested logit, and lam
    identically 1 reproduces the plain logit.
    """

    membership: np.ndarray
    lam: tuple[float, ...]

    def __post_init__(self):
        membership = np.array(self.membership, dtype=np.float64)
        membership.setflags(write=False)
        object.__setattr__(self, "membership", membership)
        object.__setattr__(self, "lam", tuple(float(v) for v in self.lam))


ChoiceModel = Union[Logit, NestedLogit, GeneralizedNestedLogit]


@dataclass(frozen=True, eq=False)
class MarketSpec:
    """Raw declaration of a matching market, prior to validation.

    Payoffs are linear in the wage w: a worker of type x receives
    (worker_utility[x-1, y-1] + eta_x * w) / sigma_x at firm type y, and the
    firm receives (firm_productivity[x-1, y-1] - eta_y * w) / sigma_y, where
    sigma are the taste-shock scales and eta the wage sensitivities (1 by
    default). Masses are the sizes of each type's population.
    """

    worker_mass: object
    firm_mass: object
    worker_utility: object
    firm_productivity: object
    worker_scale: object
    firm_scale: object
    worker_wage_sensitivity: object = None
    firm_wage_sensitivity: object = None
    worker_model: ChoiceModel = field(default_factory=Logit)
    firm_model: ChoiceModel = field(default_factory=Logit)


@dataclass(frozen=True, eq=False)
class ValidatedSpec:
    """A market specification with canonical read-only float64 arrays.

    Produced by :func:`validate_spec`; downstream code only consumes this
    form. ``worker_model``/``firm_model`` are checked read-only copies of
    the declared choice models, kept exactly as given so that documents
    round-trip bitwise.
    """

    worker_mass: np.ndarray
    firm_mass: np.ndarray
    worker_utility: np.ndarray
    firm_productivity: np.ndarray
    worker_scale: np.ndarray
    firm_scale: np.ndarray
    worker_wage_sensitivity: np.ndarray
    firm_wage_sensitivity: np.ndarray
    worker_model: ChoiceModel
    firm_model: ChoiceModel

    @property
    def num_worker_types(self) -> int:
        return self.worker_mass.shape[0]

    @property
    def num_firm_types(self) -> int:
        return self.firm_mass.shape[0]


def _positive_vector(value, name: str, length: int | None = None) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"{name} must be a numeric vector") from exc
    if arr.ndim != 1:
        raise SpecError(f"{name} must be one-dimensional; got {arr.ndim} dimensions")
    if arr.shape[0] == 0:
        raise SpecError(f"{name} must not be empty")
    if length is not None and arr.shape[0] != length:
        raise SpecError(f"{name} must have length {length}; got {arr.shape[0]}")
    for i, v in enumerate(arr):
        if not np.isfinite(v) or v <= 0.0:
            raise SpecError(f"{name}[{i + 1}] must be > 0")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def _finite_matrix(value, name: str, shape: tuple[int, int]) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"{name} must be a numeric matrix") from exc
    if arr.ndim != 2:
        raise SpecError(f"{name} must be two-dimensional; got {arr.ndim} dimensions")
    if arr.shape != shape:
        raise SpecError(f"{name} must have shape {shape}; got {arr.shape}")
    if not np.isfinite(arr).all():
        x, y = np.argwhere(~np.isfinite(arr))[0]
        raise SpecError(f"{name}[{x + 1}, {y + 1}] must be finite")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def _check_lam(lam, context: str) -> tuple[float, ...]:
    lam = tuple(float(v) for v in lam)
    if len(lam) == 0:
        raise SpecError(f"{context} must declare at least one nest")
    for k, v in enumerate(lam):
        if not np.isfinite(v) or not 0.0 < v <= 1.0:
            raise SpecError(f"{context} lambda[{k + 1}] out of (0, 1]")
    return lam


def validate_choice_model(model: ChoiceModel, num_inside: int, context: str) -> ChoiceModel:
    """Check a choice model against its invariants and return a normalized copy.

    ``num_inside`` is the number of inside alternatives the model must cover
    and ``context`` names the model in error messages.
    """
    if isinstance(model, Logit):
        return model
    if isinstance(model, NestedLogit):
        lam = _check_lam(model.lam, context)
        num_nests = len(lam)
        if len(model.nest_of) != num_inside:
            raise SpecError(
                f"{context} nest_of must have length {num_inside}; got {len(model.nest_of)}"
            )
        for i, nest in enumerate(model.nest_of):
            if not 1 <= nest <= num_nests:
                raise SpecError(
                    f"{context} nest_of[{i + 1}] must be a nest id in 1..{num_nests}; got {nest}"
                )
        for k in range(1, num_nests + 1):
            if k not in model.nest_of:
                raise SpecError(f"{context} nest {k} is empty")
        return NestedLogit(nest_of=model.nest_of, lam=lam)
    if isinstance(model, GeneralizedNestedLogit):
        lam = _check_lam(model.lam, context)
        membership = np.asarray(model.membership, dtype=np.float64)
        if membership.ndim != 2:
            raise SpecError(f"{context} membership must be two-dimensional")
        if membership.shape != (num_inside, len(lam)):
            raise SpecError(
                f"{context} membership must have shape {(num_inside, len(lam))}; "
                f"got {membership.shape}"
            )
        if not np.isfinite(membership).all() or (membership < 0.0).any():
            raise SpecError(f"{context} membership entries must be finite and >= 0")
        row_sums = membership.sum(axis=1)
        for i, s in enumerate(row_sums):
            if abs(s - 1.0) > MEMBERSHIP_ROW_TOL:
                raise SpecError(
                    f"{context} membership row {i + 1} sums to {s!r}; rows must sum to 1"
                )
        # The weights are used exactly as given (no renormalization), so a
        # market document round-trips bitwise through save and load.
        membership = membership.copy()
        membership.setflags(write=False)
        return GeneralizedNestedLogit(membership=membership, lam=lam)
    raise SpecError(f"{context} has unsupported choice model type {type(model).__name__}")


def validate_spec(spec) -> ValidatedSpec:
    """Validate a market declaration and return its canonical form.

    Idempotent: a :class:`ValidatedSpec` is returned unchanged, so callers
    may re-validate freely.
    """
    if isinstance(spec, ValidatedSpec):
        return spec
    if not isinstance(spec, MarketSpec):
        raise SpecError(f"expected a MarketSpec; got {type(spec).__name__}")

    worker_mass = _positive_vector(spec.worker_mass, "worker_mass")
    firm_mass = _positive_vector(spec.firm_mass, "firm_mass")
    num_workers = worker_mass.shape[0]
    num_firms = firm_mass.shape[0]

    worker_scale = _positive_vector(spec.worker_scale, "worker_scale", num_workers)
    firm_scale = _positive_vector(spec.firm_scale, "firm_scale", num_firms)

    if spec.worker_wage_sensitivity is None:
        worker_eta = np.ones(num_workers)
        worker_eta.setflags(write=False)
    else:
        worker_eta = _positive_vector(
            spec.worker_wage_sensitivity, "worker_wage_sensitivity", num_workers
        )
    if spec.firm_wage_sensitivity is None:
        firm_eta = np.ones(num_firms)
        firm_eta.setflags(write=False)
    else:
        firm_eta = _positive_vector(
            spec.firm_wage_sensitivity, "firm_wage_sensitivity", num_firms
        )

    shape = (num_workers, num_firms)
    worker_utility = _finite_matrix(spec.worker_utility, "worker_utility", shape)
    firm_productivity = _finite_matrix(spec.firm_productivity, "firm_productivity", shape)

    worker_model = validate_choice_model(spec.worker_model, num_firms, "worker_model")
    firm_model = validate_choice_model(spec.firm_model, num_workers, "firm_model")

    return ValidatedSpec(
        worker_mass=worker_mass,
        firm_mass=firm_mass,
        worker_utility=worker_utility,
        firm_productivity=firm_productivity,
        worker_scale=worker_scale,
        firm_scale=firm_scale,
        worker_wage_sensitivity=worker_eta,
        firm_wage_sensitivity=firm_eta,
        worker_model=worker_model,
        firm_model=firm_model,
    )


def check_wages(spec: ValidatedSpec, wages) -> np.ndarray:
    """Coerce a wage matrix to float64 and check shape and finiteness."""
    arr = np.asarray(wages, dtype=np.float64)
    shape = (spec.num_worker_types, spec.num_firm_types)
    if arr.shape != shape:
        raise SpecError(f"wages must have shape {shape}; got {arr.shape}")
    if not np.isfinite(arr).all():
        x, y = np.argwhere(~np.isfinite(arr))[0]
        raise SpecError(f"wages[{x + 1}, {y + 1}] must be finite")
    return arr


def scaled_payoffs(spec, wages) -> tuple[np.ndarray, np.ndarray]:
    """Scale-adjusted deterministic payoffs of every inside match.

    Returns the pair (worker, firm) of (X, Y) matrices

        worker[x, y] = (worker_utility[x, y] + eta_x * w[x, y]) / sigma_x
        firm[x, y]   = (firm_productivity[x, y] - eta_y * w[x, y]) / sigma_y

    against which the outside option's payoff is 0. Worker payoffs rise and
    firm payoffs fall in the wage.
    """
    spec = validate_spec(spec)
    w = check_wages(spec, wages)
    worker = (spec.worker_utility + spec.worker_wage_sensitivity[:, None] * w) / \
        spec.worker_scale[:, None]
    firm = (spec.firm_productivity - spec.firm_wage_sensitivity[None, :] * w) / \
        spec.firm_scale[None, :]
    return worker, firm
