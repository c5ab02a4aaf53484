import math

import numpy as np
import pytest

from swnkms.recovery import IllPosed, NotExtendable, chi_fit, ladder_peel
from swnkms.states import (
    CartanMeasure,
    SpectralMeasure,
    StateSpec,
    cartan_restriction,
    chi_closed_form,
)
from swnkms.verify import support_positivity_check


def random_measure(rng, max_atoms=5, with_vacuum=False):
    count = int(rng.integers(1, max_atoms + 1))
    while True:
        lams = np.sort(rng.uniform(0.2, 10.0, count))
        if count == 1 and np.min(lams % 2.0) > 1e-3:
            break
        if count > 1 and np.min(np.diff(lams)) > 0.35 and np.min(lams % 2.0) > 1e-3:
            if np.min(np.diff(np.sort(lams % 2.0))) > 0.05:
                break
    m1 = float(rng.choice([0.0, 0.3])) if with_vacuum else 0.0
    ws = rng.uniform(0.2, 1.0, count)
    ws = ws / ws.sum() * (1.0 - m1)
    return SpectralMeasure(m1, tuple(zip(lams.tolist(), ws.tolist())))


def measure_error(a: SpectralMeasure, b: SpectralMeasure) -> float:
    if len(a.atoms) != len(b.atoms):
        return math.inf
    err = abs(a.m1 - b.m1)
    for (la, wa), (lb, wb) in zip(a.atoms, b.atoms):
        err = max(err, abs(la - lb), abs(wa - wb))
    return err


class TestLadderPeel:
    def test_gibbs_roundtrip(self):
        state = StateSpec.gibbs(1.5, 1.0)
        result = ladder_peel(cartan_restriction(state), 1.0)
        assert result.method == "ladder-peel"
        assert result.measure.m1 == 0.0
        assert measure_error(result.measure, state.as_measure()) <= 1e-10
        assert result.residual <= 1e-10

    def test_delta_zero_is_vacuum(self):
        result = ladder_peel(CartanMeasure(atoms=(), m0=1.0), 1.0)
        assert result.measure.m1 == 1.0
        assert result.measure.atoms == ()
        assert result.residual == 0.0

    def test_overlapping_ladders(self):
        measure = SpectralMeasure(0.0, ((1.0, 0.5), (3.0, 0.5)))
        state = StateSpec.mixture(measure, 1.0)
        result = ladder_peel(cartan_restriction(state), 1.0)
        assert measure_error(result.measure, measure) <= 1e-10

    def test_perturbed_mass_not_extendable(self):
        state = StateSpec.gibbs(1.5, 1.0)
        atoms = list(cartan_restriction(state).atoms)
        atoms[1] = (atoms[1][0], atoms[1][1] - 0.05)
        atoms.append((99.5, 0.05))  # keep it a probability measure
        with pytest.raises(NotExtendable):
            ladder_peel(CartanMeasure(atoms=tuple(atoms), m0=0.0), 1.0)

    def test_negative_position_not_extendable(self):
        measure = CartanMeasure(atoms=((-1.0, 0.5), (1.0, 0.5)))
        with pytest.raises(NotExtendable):
            ladder_peel(measure, 1.0)

    def test_isolated_atom_not_extendable(self):
        # a bare delta at 1 has no geometric tail to support it
        measure = CartanMeasure(atoms=((1.0, 1.0),))
        with pytest.raises(NotExtendable):
            ladder_peel(measure, 1.0)

    def test_rejects_bad_arguments(self):
        measure = CartanMeasure(atoms=((1.0, 1.0),))
        with pytest.raises(ValueError):
            ladder_peel(measure, -1.0)
        with pytest.raises(ValueError):
            ladder_peel(measure, 1.0, tol=0.0)

    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    def test_randomized_roundtrips(self, beta):
        rng = np.random.default_rng(101)
        for _ in range(8):
            measure = random_measure(rng, with_vacuum=True)
            state = StateSpec.mixture(measure, beta)
            result = ladder_peel(cartan_restriction(state), beta)
            assert measure_error(result.measure, measure) <= 1e-8
            assert support_positivity_check(
                cartan_restriction(StateSpec.mixture(result.measure, beta))
            ).passed


class TestChiFit:
    def test_gibbs_roundtrip(self):
        state = StateSpec.gibbs(2.0, 1.0)
        ts = np.linspace(-10, 10, 101)
        samples = list(zip(ts, chi_closed_form(state, ts)))
        result = chi_fit(samples, 1.0, max_atoms=5)
        assert result.method == "chi-fit"
        assert measure_error(result.measure, state.as_measure()) <= 1e-6
        assert result.residual <= 1e-8

    def test_constant_chi_is_vacuum(self):
        ts = np.linspace(-10, 10, 101)
        samples = [(float(t), 1.0 + 0j) for t in ts]
        result = chi_fit(samples, 1.0, max_atoms=5)
        assert result.measure.m1 == pytest.approx(1.0)
        assert result.measure.atoms == ()
        assert result.residual <= 1e-12

    def test_gaussian_not_extendable(self):
        ts = np.linspace(-10, 10, 101)
        samples = [(float(t), complex(math.exp(-t * t))) for t in ts]
        with pytest.raises(NotExtendable):
            chi_fit(samples, 1.0, max_atoms=5)

    def test_too_few_samples_rejected(self):
        ts = np.linspace(-1, 1, 5)
        samples = [(float(t), 1.0 + 0j) for t in ts]
        with pytest.raises(ValueError):
            chi_fit(samples, 1.0, max_atoms=5)

    def test_coincident_recovered_atoms_ill_posed(self):
        measure = SpectralMeasure(0.0, ((2.0, 0.5), (2.5, 0.5)))
        state = StateSpec.mixture(measure, 1.0)
        ts = np.linspace(-10, 10, 201)
        samples = list(zip(ts, chi_closed_form(state, ts)))
        with pytest.raises(IllPosed):
            chi_fit(samples, 1.0, max_atoms=5, separation=1.0)

    def test_unresolvably_close_atoms_merge(self):
        # below the Fourier resolution the merged atom is the right answer
        measure = SpectralMeasure(0.0, ((2.0, 0.5), (2.0 + 5e-7, 0.5)))
        state = StateSpec.mixture(measure, 1.0)
        ts = np.linspace(-10, 10, 201)
        samples = list(zip(ts, chi_closed_form(state, ts)))
        result = chi_fit(samples, 1.0, max_atoms=5)
        assert len(result.measure.atoms) == 1
        assert result.measure.atoms[0][0] == pytest.approx(2.0, abs=1e-5)
        assert result.measure.atoms[0][1] == pytest.approx(1.0, abs=1e-6)

    def test_nonuniform_grid_falls_back(self):
        state = StateSpec.gibbs(1.5, 1.0)
        rng = np.random.default_rng(3)
        ts = np.sort(rng.uniform(-10, 10, 120))
        samples = list(zip(ts, chi_closed_form(state, ts)))
        result = chi_fit(samples, 1.0, max_atoms=2, tol=1e-5)
        assert measure_error(result.measure, state.as_measure()) <= 1e-5

    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    def test_randomized_roundtrips(self, beta):
        rng = np.random.default_rng(202)
        ts = np.linspace(-10, 10, 201)
        for _ in range(4):
            measure = random_measure(rng, with_vacuum=True)
            state = StateSpec.mixture(measure, beta)
            samples = list(zip(ts, chi_closed_form(state, ts)))
            result = chi_fit(samples, beta, max_atoms=5)
            assert measure_error(result.measure, measure) <= 1e-6


class TestRoutesAgree:
    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    def test_peel_and_fit_match(self, beta):
        rng = np.random.default_rng(303)
        ts = np.linspace(-10, 10, 201)
        for _ in range(3):
            measure = random_measure(rng)
            state = StateSpec.mixture(measure, beta)
            peeled = ladder_peel(cartan_restriction(state), beta)
            fitted = chi_fit(list(zip(ts, chi_closed_form(state, ts))), beta, max_atoms=5)
            assert measure_error(peeled.measure, fitted.measure) <= 1e-6
