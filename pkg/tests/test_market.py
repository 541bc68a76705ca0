"""Validation and payoff scaling of market specifications."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

import tumatch as tm


def minimal_spec(**overrides):
    base = dict(
        worker_mass=[1.0, 2.0],
        firm_mass=[1.5, 0.5],
        worker_utility=[[0.1, -0.2], [0.3, 0.4]],
        firm_productivity=[[1.0, 0.0], [-1.0, 0.5]],
        worker_scale=[1.0, 1.0],
        firm_scale=[1.0, 1.0],
    )
    base.update(overrides)
    return tm.MarketSpec(**base)


class TestValidation:
    def test_valid_spec_passes(self):
        spec = tm.validate_spec(minimal_spec())
        assert spec.num_worker_types == 2
        assert spec.num_firm_types == 2
        assert spec.worker_mass.dtype == np.float64

    def test_idempotent(self):
        spec = tm.validate_spec(minimal_spec())
        assert tm.validate_spec(spec) is spec

    def test_defaults_wage_sensitivity_to_one(self):
        spec = tm.validate_spec(minimal_spec())
        assert_allclose(spec.worker_wage_sensitivity, [1.0, 1.0])
        assert_allclose(spec.firm_wage_sensitivity, [1.0, 1.0])

    def test_arrays_are_read_only(self):
        spec = tm.validate_spec(minimal_spec())
        with pytest.raises(ValueError):
            spec.worker_utility[0, 0] = 99.0

    def test_zero_scale_rejected_with_one_based_index(self):
        with pytest.raises(tm.SpecError, match=r"worker_scale\[1\] must be > 0"):
            tm.validate_spec(minimal_spec(worker_scale=[0.0, 1.0]))

    def test_negative_mass_rejected(self):
        with pytest.raises(tm.SpecError, match=r"firm_mass\[2\]"):
            tm.validate_spec(minimal_spec(firm_mass=[1.0, -1.0]))

    def test_zero_wage_sensitivity_rejected(self):
        with pytest.raises(tm.SpecError, match=r"worker_wage_sensitivity\[2\]"):
            tm.validate_spec(minimal_spec(worker_wage_sensitivity=[1.0, 0.0]))

    def test_dimension_mismatch_reported(self):
        with pytest.raises(tm.SpecError, match=r"worker_utility must have shape \(2, 2\)"):
            tm.validate_spec(minimal_spec(worker_utility=[[0.0, 0.0, 0.0]] * 2))

    def test_nonfinite_payoff_rejected(self):
        with pytest.raises(tm.SpecError, match=r"firm_productivity\[2, 1\]"):
            tm.validate_spec(minimal_spec(firm_productivity=[[0.0, 0.0], [np.nan, 0.0]]))

    def test_empty_population_rejected(self):
        with pytest.raises(tm.SpecError, match="worker_mass"):
            tm.validate_spec(minimal_spec(worker_mass=[]))


class TestNestedLogitValidation:
    def test_valid_model(self):
        model = tm.NestedLogit(nest_of=(1, 1), lam=(0.5,))
        spec = tm.validate_spec(minimal_spec(firm_model=model))
        assert spec.firm_model.lam == (0.5,)

    def test_lambda_out_of_range(self):
        for bad in (0.0, -0.5, 1.5, np.nan):
            with pytest.raises(tm.SpecError, match=r"lambda\[1\] out of \(0, 1\]"):
                tm.validate_spec(minimal_spec(
                    worker_model=tm.NestedLogit(nest_of=(1, 1), lam=(bad,))
                ))

    def test_lambda_one_allowed(self):
        tm.validate_spec(minimal_spec(
            worker_model=tm.NestedLogit(nest_of=(1, 1), lam=(1.0,))
        ))

    def test_wrong_nest_of_length(self):
        with pytest.raises(tm.SpecError, match="nest_of must have length 2"):
            tm.validate_spec(minimal_spec(
                worker_model=tm.NestedLogit(nest_of=(1, 1, 1), lam=(1.0,))
            ))

    def test_unknown_nest_id(self):
        with pytest.raises(tm.SpecError, match=r"nest_of\[2\] must be a nest id in 1\.\.1"):
            tm.validate_spec(minimal_spec(
                worker_model=tm.NestedLogit(nest_of=(1, 2), lam=(1.0,))
            ))

    def test_empty_nest(self):
        with pytest.raises(tm.SpecError, match="nest 2 is empty"):
            tm.validate_spec(minimal_spec(
                worker_model=tm.NestedLogit(nest_of=(1, 1), lam=(0.5, 0.5))
            ))


class TestGnlValidation:
    def test_rows_within_tolerance_kept_as_given(self):
        # Rows must sum to one within tolerance but are never renormalized;
        # this keeps document round trips bitwise stable.
        membership = np.array([[0.25, 0.75], [0.5, 0.5 + 5e-10]])
        spec = tm.validate_spec(minimal_spec(
            worker_model=tm.GeneralizedNestedLogit(membership=membership, lam=(0.5, 0.8))
        ))
        assert spec.worker_model.membership.tobytes() == membership.tobytes()
        assert not spec.worker_model.membership.flags.writeable

    def test_row_sum_off_rejected(self):
        membership = np.array([[0.25, 0.75], [0.5, 0.6]])
        with pytest.raises(tm.SpecError, match="row 2 sums to"):
            tm.validate_spec(minimal_spec(
                worker_model=tm.GeneralizedNestedLogit(membership=membership, lam=(0.5, 0.8))
            ))

    def test_negative_membership_rejected(self):
        membership = np.array([[1.2, -0.2], [0.5, 0.5]])
        with pytest.raises(tm.SpecError, match="finite and >= 0"):
            tm.validate_spec(minimal_spec(
                worker_model=tm.GeneralizedNestedLogit(membership=membership, lam=(0.5, 0.8))
            ))

    def test_wrong_shape_rejected(self):
        membership = np.full((3, 2), 0.5)
        with pytest.raises(tm.SpecError, match=r"membership must have shape \(2, 2\)"):
            tm.validate_spec(minimal_spec(
                worker_model=tm.GeneralizedNestedLogit(membership=membership, lam=(0.5, 0.8))
            ))

    def test_lambda_out_of_range(self):
        membership = np.full((2, 2), 0.5)
        with pytest.raises(tm.SpecError, match=r"lambda\[2\] out of \(0, 1\]"):
            tm.validate_spec(minimal_spec(
                worker_model=tm.GeneralizedNestedLogit(membership=membership, lam=(0.5, 2.0))
            ))

    def test_empty_nest_column_allowed(self):
        # A nest no alternative belongs to is inert, not an error.
        membership = np.array([[1.0, 0.0], [1.0, 0.0]])
        tm.validate_spec(minimal_spec(
            worker_model=tm.GeneralizedNestedLogit(membership=membership, lam=(0.5, 0.8))
        ))


class TestScaledPayoffs:
    def test_values(self):
        spec = tm.validate_spec(tm.MarketSpec(
            worker_mass=[1.0], firm_mass=[1.0],
            worker_utility=[[2.0]], firm_productivity=[[3.0]],
            worker_scale=[2.0], firm_scale=[4.0],
            worker_wage_sensitivity=[1.5], firm_wage_sensitivity=[0.5],
        ))
        worker, firm = tm.scaled_payoffs(spec, [[2.0]])
        assert_allclose(worker, [[(2.0 + 1.5 * 2.0) / 2.0]])
        assert_allclose(firm, [[(3.0 - 0.5 * 2.0) / 4.0]])

    def test_worker_rises_firm_falls_in_wage(self):
        spec = tm.validate_spec(minimal_spec())
        low_w, low_f = tm.scaled_payoffs(spec, np.zeros((2, 2)))
        high_w, high_f = tm.scaled_payoffs(spec, np.ones((2, 2)))
        assert (high_w > low_w).all()
        assert (high_f < low_f).all()

    def test_affine_in_wages(self):
        spec = tm.validate_spec(minimal_spec())
        rng = np.random.default_rng(7)
        first = rng.uniform(-3.0, 3.0, (2, 2))
        second = rng.uniform(-3.0, 3.0, (2, 2))
        mix = 0.25
        for side in (0, 1):
            blended = tm.scaled_payoffs(spec, mix * first + (1 - mix) * second)[side]
            combined = mix * tm.scaled_payoffs(spec, first)[side] + \
                (1 - mix) * tm.scaled_payoffs(spec, second)[side]
            assert_allclose(blended, combined, rtol=0, atol=1e-12)

    def test_wage_shape_checked(self):
        spec = tm.validate_spec(minimal_spec())
        with pytest.raises(tm.SpecError, match=r"wages must have shape \(2, 2\)"):
            tm.scaled_payoffs(spec, np.zeros((2, 3)))

    def test_nonfinite_wage_rejected(self):
        spec = tm.validate_spec(minimal_spec())
        wages = np.zeros((2, 2))
        wages[1, 0] = np.inf
        with pytest.raises(tm.SpecError, match=r"wages\[2, 1\] must be finite"):
            tm.scaled_payoffs(spec, wages)
