import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optomacro.core import (
    HBAR,
    K_B,
    BathSpec,
    DomainError,
    ModelParams,
    binomial_exact,
    log_binomial,
    make_params,
    stable_weighted_exp_sum,
    thermal_occupation,
    thermal_occupation_from_ratio,
)
from reference import pascal


class TestParams:
    def test_vacuum(self):
        assert make_params(1, 0, 0, 0).s == 1

    def test_s_cached(self):
        assert make_params(5, 10, 10, 0).s == 21

    @pytest.mark.parametrize(
        "args, field",
        [((0, 1, 0, 0), "n_particles"), ((1, -1, 0, 0), "gamma"), ((1, 0, -0.5, 0), "nbar"), ((1, 0, 0, -1), "d_factor")],
    )
    def test_rejects(self, args, field):
        with pytest.raises(DomainError) as exc:
            make_params(*args)
        assert exc.value.field == field
        assert field in str(exc.value)

    def test_rejects_non_integer_count(self):
        with pytest.raises(DomainError):
            make_params(1.5, 0, 0, 0)

    def test_rejects_nan(self):
        with pytest.raises(DomainError):
            make_params(1, float("nan"), 0, 0)

    def test_replace_recomputes_s(self):
        import dataclasses

        p = dataclasses.replace(make_params(2, 1, 0, 0), nbar=3.5)
        assert p.s == 8.0

    @given(st.floats(0, 1e6, allow_nan=False))
    def test_s_identity(self, nbar):
        assert ModelParams(1, 0.0, nbar).s == 2 * nbar + 1


class TestThermal:
    def test_zero_temperature(self):
        assert thermal_occupation(BathSpec(1e6, 0.0)) == 0

    def test_ln2_gives_one(self):
        assert thermal_occupation_from_ratio(math.log(2)) == pytest.approx(1.0, rel=1e-15)

    def test_high_temperature_series(self):
        # kT/(hbar w) - 1/2 + x/12 from the Laurent series of 1/(e^x - 1)
        x = 1e-3
        direct = float(1 / (mp.exp(mp.mpf(x)) - 1))
        assert thermal_occupation_from_ratio(x) == pytest.approx(direct, rel=1e-13)
        assert thermal_occupation_from_ratio(x) == pytest.approx(1 / x - 0.5, rel=1e-3)
        assert thermal_occupation_from_ratio(x) == pytest.approx(999.5, rel=1e-6)

    def test_bath_uses_physical_constants(self):
        omega = 2 * math.pi * 1e6
        temperature = HBAR * omega / (K_B * math.log(2))
        assert thermal_occupation(BathSpec(omega, temperature)) == pytest.approx(1.0, rel=1e-12)

    def test_monotone_in_temperature(self):
        temps = np.linspace(0, 10, 201)
        values = [thermal_occupation(BathSpec(2 * math.pi * 1e6, t)) for t in temps]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_invalid_bath(self):
        with pytest.raises(DomainError):
            BathSpec(0.0, 1.0)
        with pytest.raises(DomainError):
            BathSpec(1.0, -1.0)

    def test_deep_quantum_limit_is_finite(self):
        assert thermal_occupation_from_ratio(2000.0) == 0.0


class TestBinomial:
    def test_small(self):
        assert binomial_exact(4, 2) == 6

    @pytest.mark.parametrize("n", [0, 1, 7, 60])
    def test_edge(self, n):
        assert binomial_exact(n, 0) == 1

    def test_against_pascal(self):
        row = pascal(40)
        assert binomial_exact(40, 20) == row[20] == 137846528820

    def test_full_rows_against_pascal(self):
        for n in range(61):
            assert [binomial_exact(n, k) for k in range(n + 1)] == pascal(n)

    def test_symmetry(self):
        for n in range(61):
            for k in range(n + 1):
                assert binomial_exact(n, k) == binomial_exact(n, n - k)

    @pytest.mark.parametrize("n, k", [(60, 30), (120, 60), (500, 123), (10, 3)])
    def test_log_accuracy(self, n, k):
        assert log_binomial(n, k) == pytest.approx(float(mp.log(mp.binomial(n, k))), rel=1e-12)

    @pytest.mark.parametrize("k", [-1, 5])
    def test_out_of_range(self, k):
        with pytest.raises(DomainError):
            binomial_exact(4, k)
        with pytest.raises(DomainError):
            log_binomial(4, k)


class TestStableSum:
    def test_identity(self):
        assert stable_weighted_exp_sum([(1, 0)]) == 1

    def test_empty(self):
        assert stable_weighted_exp_sum([]) == 0

    def test_underflow(self):
        value = stable_weighted_exp_sum([(1, -50000), (2, -50000)])
        assert value == 0.0 and not math.isnan(value)

    def test_mixed(self):
        expected = float(4 * mp.exp(-2) + 4)
        assert stable_weighted_exp_sum([(4, -2), (4, 0)]) == pytest.approx(expected, rel=1e-15)
        assert expected == pytest.approx(4.54134, abs=1e-5)

    def test_huge_exponent_representable(self):
        # 1e-300 * e^700 is representable although e^700 * 1 alone is close to the edge
        assert stable_weighted_exp_sum([(1e-300, 1400.0)]) == pytest.approx(float(mp.mpf("1e-300") * mp.exp(1400)), rel=1e-12)

    def test_cancellation(self):
        assert stable_weighted_exp_sum([(1.0, 0.0), (1e-20, 0.0), (-1.0, 0.0)]) == pytest.approx(1e-20, rel=1e-12)

    def test_accepts_array(self):
        arr = np.array([[1.0, 0.0], [1.0, math.log(2)]])
        assert stable_weighted_exp_sum(arr) == pytest.approx(3.0)

    @settings(max_examples=300)
    @given(
        st.lists(
            st.tuples(st.floats(-1e3, 1e3, allow_nan=False), st.floats(-1e6, 1e6, allow_nan=False)),
            max_size=20,
        )
    )
    def test_never_nan(self, terms):
        exact = mp.fsum(mp.mpf(c) * mp.exp(mp.mpf(e)) for c, e in terms)
        scale = mp.fsum(abs(mp.mpf(c)) * mp.exp(mp.mpf(e)) for c, e in terms)
        value = stable_weighted_exp_sum(terms)
        assert not math.isnan(value)
        if abs(exact) < mp.mpf("1e300"):
            assert math.isfinite(value)
            assert value == pytest.approx(float(exact), rel=1e-12, abs=float(scale * 1e-15) + 1e-300)
