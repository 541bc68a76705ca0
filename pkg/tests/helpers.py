"""Shared market factories for the test suite.

Everything is driven by explicit integer seeds through numpy's default_rng,
so every test run sees exactly the same markets.
"""

from __future__ import annotations

import numpy as np

import tumatch as tm


def random_logit_spec(num_workers: int, num_firms: int, seed: int) -> tm.ValidatedSpec:
    """Logit market with masses and scales in [0.5, 2] and payoffs in [-2, 2]."""
    rng = np.random.default_rng(seed)
    return tm.validate_spec(tm.MarketSpec(
        worker_mass=rng.uniform(0.5, 2.0, num_workers),
        firm_mass=rng.uniform(0.5, 2.0, num_firms),
        worker_utility=rng.uniform(-2.0, 2.0, (num_workers, num_firms)),
        firm_productivity=rng.uniform(-2.0, 2.0, (num_workers, num_firms)),
        worker_scale=rng.uniform(0.5, 2.0, num_workers),
        firm_scale=rng.uniform(0.5, 2.0, num_firms),
    ))


def random_partition(rng: np.random.Generator, num_inside: int,
                     max_nests: int = 3) -> tuple[tuple[int, ...], int]:
    """Random assignment of alternatives to nests with every nest non-empty."""
    num_nests = int(rng.integers(1, min(num_inside, max_nests) + 1))
    nest_of = np.empty(num_inside, dtype=np.int64)
    order = rng.permutation(num_inside)
    for k in range(num_nests):
        nest_of[order[k]] = k + 1
    for pos in order[num_nests:]:
        nest_of[pos] = int(rng.integers(1, num_nests + 1))
    return tuple(int(v) for v in nest_of), num_nests


def random_nested_model(rng: np.random.Generator, num_inside: int,
                        lam_low: float = 0.2) -> tm.NestedLogit:
    nest_of, num_nests = random_partition(rng, num_inside)
    return tm.NestedLogit(nest_of=nest_of, lam=tuple(rng.uniform(lam_low, 1.0, num_nests)))


def random_gnl_model(rng: np.random.Generator, num_inside: int,
                     lam_low: float = 0.2) -> tm.GeneralizedNestedLogit:
    num_nests = int(rng.integers(1, 4))
    return tm.GeneralizedNestedLogit(
        membership=rng.dirichlet(np.ones(num_nests), num_inside),
        lam=tuple(rng.uniform(lam_low, 1.0, num_nests)),
    )


def random_spec(num_workers: int, num_firms: int, seed: int,
                worker_kind: str = "logit", firm_kind: str = "logit",
                lam_low: float = 0.2) -> tm.ValidatedSpec:
    """Market with the requested model family ('logit', 'nested', 'gnl') per side."""
    rng = np.random.default_rng(seed)
    base = dict(
        worker_mass=rng.uniform(0.5, 2.0, num_workers),
        firm_mass=rng.uniform(0.5, 2.0, num_firms),
        worker_utility=rng.uniform(-2.0, 2.0, (num_workers, num_firms)),
        firm_productivity=rng.uniform(-2.0, 2.0, (num_workers, num_firms)),
        worker_scale=rng.uniform(0.5, 2.0, num_workers),
        firm_scale=rng.uniform(0.5, 2.0, num_firms),
    )

    def build(kind: str, num_inside: int):
        if kind == "logit":
            return tm.Logit()
        if kind == "nested":
            return random_nested_model(rng, num_inside, lam_low)
        if kind == "gnl":
            return random_gnl_model(rng, num_inside, lam_low)
        raise ValueError(f"unknown model kind {kind!r}")

    return tm.validate_spec(tm.MarketSpec(
        worker_model=build(worker_kind, num_firms),
        firm_model=build(firm_kind, num_workers),
        **base,
    ))


def clearing_suite_market(index: int) -> tm.ValidatedSpec:
    """Market ``index`` of the 20-market logit clearing suite.

    Indices 0-1 are 1x1 and 2-3 are 2x2 (so the tiny-market oracle always
    has instances to check); the rest draw their size uniformly from
    [1, 10]^2 with a generator derived from the index.
    """
    if index < 2:
        shape = (1, 1)
    elif index < 4:
        shape = (2, 2)
    else:
        shape_rng = np.random.default_rng(1000 + index)
        shape = tuple(int(v) for v in shape_rng.integers(1, 11, size=2))
    return random_logit_spec(shape[0], shape[1], seed=index)
