import json
import math

import numpy as np
import pytest

from swnkms.algebra import AlgebraElement, N, X, Y, apply_automorphism
from swnkms.funcspace import ONE, X_VAR, FunctionExpr
from swnkms.states import (
    CartanMeasure,
    SpectralMeasure,
    StateSpec,
    cartan_moment,
    cartan_restriction,
    chi_closed_form,
    eval_kms_recursion,
    eval_trace,
    state_from_dict,
    state_to_dict,
)

LN2 = math.log(2.0)


def geometric_oracle(lam, beta, diag_fn, depth=4000):
    """Independent sum over the spectrum: sum_p (1-q) q^p diag_fn(p) (brute force)."""
    q = math.exp(-beta)
    ps = np.arange(depth)
    weights = (1.0 - q) * q ** ps.astype(float)
    return complex(np.sum(weights * np.asarray([diag_fn(int(p)) for p in ps])))


def gibbs_monomial_oracle(lam, beta, m, f, depth=4000):
    """rho_lambda(X^m Y^m N_F) summed directly from the module action."""

    def diag(p):
        value = 1.0
        for i in range(m):
            value *= (p - i) * (lam + p - i - 1)
        value *= (-1.0) ** m if m else 1.0
        return value * f(lam + 2.0 * p)

    return geometric_oracle(lam, beta, diag, depth)


class TestEvalTracePinned:
    def test_cartan_generator(self):
        state = StateSpec.gibbs(1.0, LN2)
        assert eval_trace(state, N(X_VAR)) == pytest.approx(3.0)

    def test_xy_is_minus_three(self):
        state = StateSpec.gibbs(1.0, LN2)
        assert eval_trace(state, X * Y) == pytest.approx(-3.0)

    def test_x2y2_is_fifty_two(self):
        state = StateSpec.gibbs(1.0, LN2)
        assert eval_trace(state, X * X * Y * Y) == pytest.approx(52.0)

    def test_vacuum_reads_f_at_zero(self):
        state = StateSpec.vacuum(1.0)
        f = FunctionExpr.x_power(2) + ONE
        assert eval_trace(state, N(f)) == pytest.approx(1.0)
        assert eval_trace(state, X * Y * N(f)) == 0

    def test_off_weight_vanishes(self):
        state = StateSpec.gibbs(1.0, LN2)
        assert eval_trace(state, X) == 0
        assert eval_trace(state, X * X * Y) == 0

    def test_unit_normalization(self):
        for state in (
            StateSpec.vacuum(1.0),
            StateSpec.gibbs(2.5, 0.7),
            StateSpec.mixture(SpectralMeasure(0.4, ((1.0, 0.3), (4.0, 0.3))), 1.0),
        ):
            assert eval_trace(state, AlgebraElement.one()) == pytest.approx(1.0)

    def test_rejects_bad_tolerance(self):
        with pytest.raises(ValueError):
            eval_trace(StateSpec.gibbs(1.0, 1.0), X * Y, tol=0.0)

    @pytest.mark.parametrize("lam", [0.3, 1.0, 2.0])
    @pytest.mark.parametrize("beta", [0.5, LN2, 1.0])
    @pytest.mark.parametrize("m", [0, 1, 2])
    def test_against_geometric_oracle(self, lam, beta, m):
        f = FunctionExpr([(1, 0.0, 1.0), (0, 0.4, 0.5)])
        state = StateSpec.gibbs(lam, beta)
        expected = gibbs_monomial_oracle(lam, beta, m, f)
        got = eval_trace(state, AlgebraElement.monomial(m, m, f))
        assert abs(got - expected) <= 1e-9 * (1.0 + abs(expected))

    def test_gibbs_equals_one_atom_mixture(self):
        gibbs = StateSpec.gibbs(1.7, 0.9)
        mixture = StateSpec.mixture(SpectralMeasure(0.0, ((1.7, 1.0),)), 0.9)
        for a in (N(X_VAR), X * Y, X * X * Y * Y * N(X_VAR)):
            assert eval_trace(gibbs, a) == pytest.approx(eval_trace(mixture, a))

    def test_covariance_under_dynamics(self):
        state = StateSpec.gibbs(1.5, 1.0)
        a = X * Y + 2.0 * X - 1j * Y * Y + N(X_VAR)
        for t in (0.3, 1.7):
            moved = apply_automorphism(a, t)
            assert abs(eval_trace(state, moved) - eval_trace(state, a)) <= 1e-10


class TestChiClosedForm:
    def test_normalized_at_zero(self):
        states = [
            StateSpec.vacuum(1.0),
            StateSpec.gibbs(2.0, 0.5),
            StateSpec.mixture(SpectralMeasure(0.5, ((2.0, 0.5),)), 1.0),
        ]
        for state in states:
            assert chi_closed_form(state, 0.0) == pytest.approx(1.0)

    def test_gibbs_at_pi(self):
        for beta in (0.5, LN2, 1.0, 2.0):
            value = chi_closed_form(StateSpec.gibbs(1.0, beta), math.pi)
            assert value == pytest.approx(-1.0)

    def test_mixture_formula(self):
        state = StateSpec.mixture(SpectralMeasure(0.5, ((2.0, 0.5),)), 1.0)
        t = 0.73
        q = math.exp(-1.0)
        expected = 0.5 + 0.5 * np.exp(2j * t) * (1 - q) / (1 - q * np.exp(2j * t))
        assert chi_closed_form(state, t) == pytest.approx(expected)

    def test_matches_trace_of_exponential(self):
        state = StateSpec.gibbs(1.5, 0.8)
        for t in np.linspace(-10, 10, 21):
            traced = eval_trace(state, N(FunctionExpr.exponential(t)))
            assert abs(traced - chi_closed_form(state, float(t))) <= 1e-10

    def test_array_input(self):
        ts = np.linspace(-5, 5, 11)
        vals = chi_closed_form(StateSpec.gibbs(1.0, 1.0), ts)
        assert vals.shape == ts.shape
        assert vals[5] == pytest.approx(1.0)


class TestCartanMeasures:
    def test_moment_of_delta_zero(self):
        measure = CartanMeasure(atoms=(), m0=1.0)
        f = FunctionExpr.x_power(2) + ONE
        assert cartan_moment(measure, f) == pytest.approx(1.0)

    def test_moment_uniform_two_points(self):
        measure = CartanMeasure(atoms=((1.0, 0.5), (3.0, 0.5)))
        assert cartan_moment(measure, X_VAR) == pytest.approx(2.0)

    def test_geometric_ladder_picks_up_parity_phase(self):
        state = StateSpec.gibbs(1.0, LN2)
        measure = cartan_restriction(state)
        value = cartan_moment(measure, FunctionExpr.exponential(math.pi))
        assert value == pytest.approx(-1.0)

    def test_restriction_of_vacuum(self):
        measure = cartan_restriction(StateSpec.vacuum(1.0))
        assert measure.m0 == pytest.approx(1.0)
        assert measure.atoms == ()

    def test_restriction_base_mass(self):
        for beta in (0.5, 1.0, 2.0):
            measure = cartan_restriction(StateSpec.gibbs(0.7, beta))
            assert measure.atoms[0][0] == pytest.approx(0.7)
            assert measure.atoms[0][1] == pytest.approx(1.0 - math.exp(-beta), rel=1e-9)

    def test_restriction_halving_masses(self):
        measure = cartan_restriction(StateSpec.gibbs(1.0, LN2))
        for p in range(6):
            assert measure.atoms[p][0] == pytest.approx(1.0 + 2 * p)
            assert measure.atoms[p][1] == pytest.approx(0.5 ** (p + 1), rel=1e-9)

    def test_restriction_total_mass_is_one(self):
        state = StateSpec.mixture(SpectralMeasure(0.25, ((1.0, 0.5), (2.2, 0.25))), 0.8)
        measure = cartan_restriction(state)
        total = measure.m0 + sum(m for _, m in measure.atoms)
        assert total == pytest.approx(1.0, abs=1e-13)

    def test_positivity_of_moments(self):
        state = StateSpec.gibbs(1.2, 1.0)
        measure = cartan_restriction(state)
        f = FunctionExpr.x_power(2)  # pointwise nonnegative
        assert cartan_moment(measure, f).real > 0


class TestSpectralMeasureInvariants:
    def test_duplicate_atoms_merge(self):
        m = SpectralMeasure(0.0, ((2.0, 0.5), (2.0, 0.5)))
        assert m.atoms == ((2.0, 1.0),)

    def test_gibbs_rejects_nonpositive_lambda(self):
        with pytest.raises(ValueError):
            StateSpec.gibbs(0.0, 1.0)
        with pytest.raises(ValueError):
            StateSpec.gibbs(-1.0, 1.0)

    def test_rejects_nonpositive_beta(self):
        with pytest.raises(ValueError):
            StateSpec.vacuum(0.0)

    def test_rejects_nonpositive_location(self):
        with pytest.raises(ValueError):
            SpectralMeasure(0.0, ((-1.0, 1.0),))

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            SpectralMeasure(0.0, ((1.0, 0.5),))

    def test_rejects_negative_weight(self):
        with pytest.raises(ValueError):
            SpectralMeasure(1.5, ((1.0, -0.5),))


class TestKmsRecursion:
    def test_xy_pinned(self):
        measure = SpectralMeasure(0.0, ((1.0, 1.0),))
        value = eval_kms_recursion(measure, LN2, X * Y)
        assert abs(value - (-3.0)) <= 1e-8

    def test_covariance_kills_x(self):
        measure = SpectralMeasure(0.3, ((2.0, 0.7),))
        assert eval_kms_recursion(measure, 1.0, X) == 0

    def test_cartan_base_case_is_moment(self):
        measure = SpectralMeasure(0.0, ((1.3, 1.0),))
        f = FunctionExpr([(2, 0.0, 1.0), (0, 0.5, 1j)])
        state = StateSpec.mixture(measure, 0.9)
        expected = cartan_moment(cartan_restriction(state), f)
        got = eval_kms_recursion(measure, 0.9, N(f))
        assert abs(got - expected) <= 1e-10 * (1 + abs(expected))

    def test_x2y2_pinned(self):
        measure = SpectralMeasure(0.0, ((1.0, 1.0),))
        value = eval_kms_recursion(measure, LN2, X * X * Y * Y)
        assert abs(value - 52.0) <= 1e-6

    def test_vacuum_component(self):
        measure = SpectralMeasure(1.0, ())
        vacuum = StateSpec.vacuum(1.2)
        for a in (X * Y, X * X * Y * Y, N(FunctionExpr.x_power(3))):
            lhs = eval_kms_recursion(measure, 1.2, a)
            rhs = eval_trace(vacuum, a)
            assert abs(lhs - rhs) <= 1e-10

    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    def test_agrees_with_trace_on_mixture(self, beta):
        measure = SpectralMeasure(0.3, ((0.8, 0.4), (3.1, 0.3)))
        state = StateSpec.mixture(measure, beta)
        f = FunctionExpr([(2, 0.0, 1.0), (0, 0.7, 0.5)])
        for m in (1, 2, 3):
            a = AlgebraElement.monomial(m, m, f)
            lhs = eval_kms_recursion(measure, beta, a)
            rhs = eval_trace(state, a)
            assert abs(lhs - rhs) <= 1e-8 * (1.0 + abs(rhs))

    def test_rejects_bad_arguments(self):
        measure = SpectralMeasure(0.0, ((1.0, 1.0),))
        with pytest.raises(ValueError):
            eval_kms_recursion(measure, -1.0, X * Y)
        with pytest.raises(ValueError):
            eval_kms_recursion(measure, 1.0, X * Y, tol=0.0)

    def test_series_cap_guards_nonconvergence(self):
        from swnkms.states import ConvergenceError

        measure = SpectralMeasure(0.0, ((1.0, 1.0),))
        with pytest.raises(ConvergenceError):
            eval_kms_recursion(measure, 0.5, X * Y, tol=1e-12, max_j=3)


class TestStateSerialization:
    def test_roundtrip_all_kinds(self):
        states = [
            StateSpec.vacuum(1.0),
            StateSpec.gibbs(2.0, 0.5),
            StateSpec.mixture(SpectralMeasure(0.5, ((2.0, 0.5),)), 1.0),
        ]
        for state in states:
            again = state_from_dict(json.loads(json.dumps(state_to_dict(state))))
            assert again == state

    def test_documented_shape(self):
        data = {"beta": 1.0, "kind": "mixture", "m1": 0.5, "atoms": [{"lambda": 2.0, "w": 0.5}]}
        state = state_from_dict(data)
        assert state.measure.m1 == 0.5
        assert state.measure.atoms == ((2.0, 0.5),)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            state_from_dict({"beta": 1.0, "kind": "thermal"})

    def test_rejects_missing_beta(self):
        with pytest.raises(ValueError):
            state_from_dict({"kind": "vacuum"})
