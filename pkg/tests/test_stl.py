"""Seasonal-trend decomposition contracts."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from grasynda import DataError, TimeSeries, recombine, stl_decompose


def rms(x):
    return float(np.sqrt(np.mean(np.square(x))))


class TestDecompose:
    def test_pure_linear_has_no_seasonal(self):
        y = np.arange(24, dtype=float)
        dec = stl_decompose(TimeSeries("lin", 4, y))
        value_range = y.max() - y.min()
        assert np.max(np.abs(dec.seasonal)) < 1e-6 * value_range
        assert np.max(np.abs(dec.remainder)) < 1e-6 * value_range

    def test_sine_plus_trend_recovered(self):
        t = np.arange(120, dtype=float)
        y = 10.0 * np.sin(2.0 * np.pi * t / 12.0) + 0.5 * t
        dec = stl_decompose(TimeSeries("s", 12, y))
        assert rms(dec.remainder) < 0.05 * rms(y)

    def test_reconstruction_identity(self):
        rng = np.random.default_rng(2)
        y = rng.normal(50, 5, 60)
        dec = stl_decompose(TimeSeries("r", 6, y))
        np.testing.assert_allclose(dec.trend + dec.seasonal + dec.remainder, y, atol=1e-9)

    def test_cycle_means_are_zero(self):
        rng = np.random.default_rng(3)
        t = np.arange(96, dtype=float)
        y = 200 + 20 * np.sin(2 * np.pi * t / 12) + rng.normal(0, 5, 96)
        dec = stl_decompose(TimeSeries("c", 12, y))
        for c in range(96 // 12):
            assert abs(dec.seasonal[c * 12 : (c + 1) * 12].mean()) <= 1e-6

    def test_periodic_signal_idempotence(self):
        m = 12
        pattern = 5.0 * np.sin(2 * np.pi * np.arange(m) / m)
        pattern -= pattern.mean()
        y = np.tile(pattern, 10)
        dec = stl_decompose(TimeSeries("p", m, y))
        inner = slice(m, len(y) - m)  # skip the boundary regions
        assert rms(dec.seasonal[inner] - y[inner]) < 0.02 * rms(y[inner])

    def test_too_short(self):
        with pytest.raises(DataError, match="too short"):
            stl_decompose(TimeSeries("x", 4, np.arange(7.0)))

    def test_period_one_rejected(self):
        with pytest.raises(DataError, match="period"):
            stl_decompose(TimeSeries("x", 1, np.arange(30.0)))

    def test_minimum_length_two_cycles(self):
        dec = stl_decompose(TimeSeries("x", 4, np.arange(8.0)))
        assert len(dec) == 8

    @given(
        period=st.integers(2, 12),
        cycles=st.integers(2, 20),
        seed=st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=40, deadline=None)
    def test_identity_on_random_series(self, period, cycles, seed):
        rng = np.random.default_rng(seed)
        T = period * cycles
        y = rng.normal(0, 1, T).cumsum() + rng.uniform(-100, 100)
        dec = stl_decompose(TimeSeries("h", period, y))
        np.testing.assert_allclose(dec.trend + dec.seasonal + dec.remainder, y, atol=1e-9)
        assert np.all(np.isfinite(dec.trend))
        assert np.all(np.isfinite(dec.seasonal))
        assert np.all(np.isfinite(dec.remainder))


class TestRecombine:
    def make(self):
        rng = np.random.default_rng(4)
        y = 30 + 4 * np.sin(2 * np.pi * np.arange(48) / 12) + rng.normal(0, 1, 48)
        return y, stl_decompose(TimeSeries("r", 12, y))

    def test_own_remainder_restores_series(self):
        y, dec = self.make()
        np.testing.assert_allclose(recombine(dec, dec.remainder), y, atol=1e-9)

    def test_zero_remainder(self):
        _, dec = self.make()
        np.testing.assert_allclose(
            recombine(dec, np.zeros(len(dec))), dec.trend + dec.seasonal
        )

    def test_length_mismatch(self):
        _, dec = self.make()
        with pytest.raises(DataError, match="length mismatch"):
            recombine(dec, np.zeros(len(dec) - 1))
