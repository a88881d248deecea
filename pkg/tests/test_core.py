import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpcrepeater.core import (
    ChannelParams,
    CodeParams,
    CountVector,
    DetectorParams,
    ErrorModelSpec,
    Level,
    OutcomeMatrix,
    composition_array,
    composition_count,
    enumerate_compositions,
    multinomial,
    pow_prob,
)


class TestEnumerateCompositions:
    def test_two_slots(self):
        got = {cv.counts for cv in enumerate_compositions(2, {1, 2})}
        assert got == {
            (2, 0, 0, 0, 0, 0, 0),
            (1, 1, 0, 0, 0, 0, 0),
            (0, 2, 0, 0, 0, 0, 0),
        }

    def test_zero_total(self):
        got = list(enumerate_compositions(0, range(1, 8)))
        assert got == [CountVector((0,) * 7)]

    def test_count_against_brute_force(self):
        # independent oracle: exhaustive enumeration over a bounded product
        slots = (3, 4, 5, 7)
        total = 5
        brute = sum(
            1 for combo in itertools.product(range(total + 1), repeat=4) if sum(combo) == total
        )
        assert brute == 56
        items = list(enumerate_compositions(total, slots))
        assert len(items) == brute
        assert len({cv.counts for cv in items}) == brute
        for cv in items:
            assert cv.total == total
            assert all(cv.counts[i] == 0 for i in range(7) if i + 1 not in slots)

    @pytest.mark.parametrize("total", range(0, 9))
    @pytest.mark.parametrize("k", range(1, 8))
    def test_count_formula(self, total, k):
        slots = tuple(range(1, k + 1))
        brute = sum(
            1
            for combo in itertools.product(range(total + 1), repeat=k)
            if sum(combo) == total
        )
        items = list(enumerate_compositions(total, slots))
        assert len(items) == brute == composition_count(total, k)

    def test_matches_composition_array(self):
        rows = [cv.counts for cv in enumerate_compositions(4, (2, 5, 6))]
        arr = composition_array(4, 3)
        assert len(rows) == arr.shape[0]
        embedded = [tuple(r) for r in arr]
        got = [(r[1], r[4], r[5]) for r in rows]
        assert got == embedded

    def test_rejects_empty_slots(self):
        with pytest.raises(ValueError):
            list(enumerate_compositions(2, ()))


class TestMultinomial:
    def test_simple(self):
        assert multinomial(4, (2, 2, 0, 0, 0, 0, 0)) == 6.0

    @pytest.mark.parametrize("m", [1, 3, 7, 40])
    def test_degenerate(self, m):
        assert multinomial(m, (m, 0, 0, 0, 0, 0, 0)) == 1.0

    def test_against_factorials(self):
        expected = math.factorial(10) // (
            math.factorial(3) * math.factorial(3) * math.factorial(4)
        )
        assert expected == 4200
        assert multinomial(10, (3, 3, 4, 0, 0, 0, 0)) == float(expected)

    def test_total_mismatch(self):
        with pytest.raises(ValueError):
            multinomial(5, (2, 2, 0, 0, 0, 0, 0))

    @pytest.mark.parametrize("k", [2, 3, 5])
    @pytest.mark.parametrize("total", [0, 1, 4, 7, 10])
    def test_multinomial_theorem(self, k, total):
        acc = sum(
            multinomial(total, cv) for cv in enumerate_compositions(total, range(1, k + 1))
        )
        assert acc == pytest.approx(float(k) ** total, rel=1e-13)

    def test_large_total_log_space(self):
        # 200 photons in one slot still has coefficient 1
        counts = [0] * 7
        counts[2] = 200
        assert multinomial(200, tuple(counts)) == pytest.approx(1.0, rel=1e-10)


class TestDomainTypes:
    def test_code_params_validation(self):
        with pytest.raises(ValueError):
            CodeParams(0, 3)
        with pytest.raises(ValueError):
            CodeParams(3, -1)
        with pytest.raises(ValueError):
            CodeParams(100, 100)  # exceeds default photon cap
        assert CodeParams(100, 20).nm == 2000

    def test_channel_params(self):
        chan = ChannelParams(1000.0, 2.4)
        assert chan.n_stations == pytest.approx(1000.0 / 2.4)
        assert chan.eta_t == pytest.approx(math.exp(-2.4 / 22.0))
        with pytest.raises(ValueError):
            ChannelParams(10.0, 20.0)
        with pytest.raises(ValueError):
            ChannelParams(10.0, 0.0)

    def test_integer_station_mode(self):
        chan = ChannelParams.from_station_count(1000.0, 400)
        assert chan.l0_km == pytest.approx(2.5)
        assert chan.n_stations == pytest.approx(400.0)

    def test_detector_params(self):
        with pytest.raises(ValueError):
            DetectorParams(1.2)
        with pytest.raises(ValueError):
            DetectorParams(0.9, -0.1)

    def test_error_model_validation(self):
        with pytest.raises(ValueError):
            ErrorModelSpec.depol(0.6)
        with pytest.raises(ValueError):
            ErrorModelSpec.onoff(0.01)  # depolarizing on-off needs kappa
        with pytest.raises(ValueError):
            ErrorModelSpec(kind=next(iter(ErrorModelSpec.loss().kind.__class__)), epsilon=0.1)
        spec = ErrorModelSpec.onoff(0.01, kappa=2)
        assert spec.kappa == 2

    def test_outcome_matrix_validation(self):
        vals = np.zeros((7, 4))
        vals[0, :] = 1.0
        mat = OutcomeMatrix(vals, Level.PHYSICAL)
        assert mat.entry(1, 1) == 1.0
        bad = vals.copy()
        bad[0, 0] = 0.5
        with pytest.raises(ValueError):
            OutcomeMatrix(bad, Level.PHYSICAL)
        with pytest.raises(ValueError):
            OutcomeMatrix(np.zeros((6, 4)), Level.PHYSICAL)

    def test_count_vector(self):
        cv = CountVector((1, 0, 2, 0, 0, 0, 0))
        assert cv.total == 3
        with pytest.raises(ValueError):
            CountVector((1, 2, 3))
        with pytest.raises(ValueError):
            CountVector((1, -1, 0, 0, 0, 0, 0))


@given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=1.0, max_value=5000.0))
@settings(deadline=None)
def test_pow_prob_stays_in_unit_interval(x, n):
    out = pow_prob(x, n)
    assert 0.0 <= out <= 1.0
    if 1e-3 < x < 1.0:
        assert out == pytest.approx(x**n, rel=1e-9, abs=1e-300)
