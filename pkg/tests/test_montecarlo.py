import numpy as np
import pytest

from trpower.analytic import GammaParams, Tail, gamma_cdf, gamma_quantile
from trpower.channel import ChannelDims, generate_channel
from trpower.errors import InsufficientSamplesError, SampleBudgetError
from trpower.montecarlo import (
    EmpiricalDistribution,
    SimConfig,
    block_stream,
    empirical_ccdf,
    empirical_cdf,
    empirical_tail_quantile,
    ks_distance,
    run_ensemble,
    scaling_sweep,
    sweep_realizations,
    tail_order_statistic,
)
from trpower.powers import Measure, relative_powers, to_decibel
from trpower.precoder import NormalizationKind

TR, DTR, PI = NormalizationKind.TR, NormalizationKind.DTR, NormalizationKind.PI


def test_config_validation():
    dims = ChannelDims(2, 2)
    with pytest.raises(ValueError):
        SimConfig(dims, realizations=0)
    with pytest.raises(ValueError):
        SimConfig(dims, kinds=())
    with pytest.raises(ValueError):
        SimConfig(dims, seed=-1)
    assert SimConfig(dims, kinds=(PI, TR, PI)).kinds == (TR, PI)


def test_single_realization_matches_direct_computation():
    dims = ChannelDims(3, 4)
    samples = run_ensemble(SimConfig(dims, realizations=1, seed=5))
    ch = generate_channel(dims, block_stream(5, 0))
    for kind in NormalizationKind:
        direct = relative_powers(ch, kind)
        np.testing.assert_allclose(samples[kind].ant, direct.p_ant, rtol=1e-12)
        assert samples[kind].bs[0] == pytest.approx(direct.p_bs, rel=1e-12)
        assert samples[kind].rx[0] == pytest.approx(direct.p_rx, rel=1e-12)


def test_sample_lengths():
    dims = ChannelDims(5, 2)
    pooled = run_ensemble(SimConfig(dims, realizations=5000, kinds=(DTR,)))
    single = run_ensemble(SimConfig(dims, realizations=5000, kinds=(DTR,), pool_antennas=False))
    assert pooled[DTR].ant.shape == (25000,)
    assert single[DTR].ant.shape == (5000,)
    assert pooled[DTR].bs.shape == single[DTR].rx.shape == (5000,)
    # antenna 0 of every realization is the first entry of each pooled group
    np.testing.assert_array_equal(pooled[DTR].ant[::5], single[DTR].ant)


def test_kinds_share_channel_draws():
    s = run_ensemble(SimConfig(ChannelDims(4, 4), realizations=20000, seed=3))
    np.testing.assert_array_equal(s[DTR].rx, s[DTR].bs**2)
    # TR rx is S/M, the DTR bs value of the same draw
    np.testing.assert_allclose(s[TR].rx, s[DTR].bs, rtol=1e-15)
    np.testing.assert_allclose(s[PI].bs, 1 / s[DTR].bs, rtol=1e-14)
    assert np.all(s[TR].bs == 1.0) and np.all(s[PI].rx == 1.0)
    # separate runs with one kind each reproduce the combined run
    only_pi = run_ensemble(SimConfig(ChannelDims(4, 4), realizations=20000, seed=3, kinds=(PI,)))
    np.testing.assert_array_equal(only_pi[PI].ant, s[PI].ant)


def test_deterministic_across_workers():
    cfg = SimConfig(ChannelDims(3, 4), realizations=30000, seed=99)
    a = run_ensemble(cfg, workers=1)
    b = run_ensemble(cfg, workers=4)
    for kind in cfg.kinds:
        for measure in Measure:
            assert a[kind][measure].tobytes() == b[kind][measure].tobytes()


def test_prefix_stability():
    # realization r depends only on (seed, r)
    small = run_ensemble(SimConfig(ChannelDims(2, 3), realizations=5000, seed=1, kinds=(DTR,)))
    large = run_ensemble(SimConfig(ChannelDims(2, 3), realizations=9000, seed=1, kinds=(DTR,)))
    np.testing.assert_array_equal(small[DTR].bs, large[DTR].bs[:5000])


def test_budget_refused():
    with pytest.raises(SampleBudgetError):
        run_ensemble(SimConfig(ChannelDims(200, 1), realizations=10**6))


def test_empirical_functions():
    d = EmpiricalDistribution(np.array([3.0, 1.0, 4.0, 2.0]))
    assert d.count == 4
    assert list(d.samples) == [1, 2, 3, 4]
    assert empirical_cdf(d, 0.5) == 0 and empirical_ccdf(d, 0.5) == 1
    assert empirical_cdf(d, 2.0) == 0.5 and empirical_ccdf(d, 2.0) == 0.5
    xs = np.linspace(0, 5, 51)
    np.testing.assert_allclose(empirical_cdf(d, xs) + empirical_ccdf(d, xs), 1.0)
    with pytest.raises(ValueError):
        EmpiricalDistribution(np.array([]))


def test_tail_quantile_rank_arithmetic():
    values = np.arange(1, 10001, dtype=float)
    d = EmpiricalDistribution(values[::-1])
    assert empirical_tail_quantile(d, 1e-3, Tail.UPPER) == 9991.0
    assert empirical_tail_quantile(d, 1e-3, Tail.LOWER) == 10.0
    assert tail_order_statistic(values.copy(), 1e-3, Tail.UPPER) == 9991.0
    assert tail_order_statistic(values.copy(), 1e-3, Tail.LOWER) == 10.0
    # 1e-4 * 1e6 must land on rank 100 exactly
    big = np.arange(1, 10**6 + 1, dtype=float)
    assert tail_order_statistic(big, 1e-4, Tail.UPPER) == 10**6 - 99
    with pytest.raises(InsufficientSamplesError):
        empirical_tail_quantile(d, 1e-4)


def test_ks_distance_small_case():
    d = EmpiricalDistribution(np.array([0.5]))
    assert ks_distance(d, lambda x: x) == pytest.approx(0.5)
    d = EmpiricalDistribution(np.array([0.25, 0.75]))
    assert ks_distance(d, lambda x: x) == pytest.approx(0.25)


def test_ks_distance_matches_scipy(rng):
    from scipy import stats

    x = rng.gamma(4, 0.25, size=20000)
    d = EmpiricalDistribution(x)
    ref = stats.kstest(x, stats.gamma(4, scale=0.25).cdf).statistic
    assert ks_distance(d, lambda s: gamma_cdf(GammaParams(4, 0.25), s)) == pytest.approx(ref, abs=1e-12)


def test_dtr_moments_small_ensemble():
    s = run_ensemble(SimConfig(ChannelDims(4, 4), realizations=200_000, seed=2, kinds=(DTR,)))
    rx = s[DTR].rx
    # five standard errors with the exact variance
    assert abs(rx.mean() - (1 + 1 / 16)) <= 5 * np.sqrt(0.29052734375 / rx.size)


def test_tr_rx_tail_matches_analytic_quantile():
    s = run_ensemble(SimConfig(ChannelDims(16, 4), realizations=10**6, seed=4, kinds=(TR,)))
    empirical = empirical_tail_quantile(EmpiricalDistribution(s[TR].rx), 1e-4, Tail.LOWER)
    analytic = gamma_quantile(GammaParams.unit_mean(64), 1e-4, Tail.LOWER)
    assert abs(to_decibel(empirical) - to_decibel(analytic)) < 0.15


def test_sweep_realizations_policy():
    base = SimConfig(ChannelDims(1, 4), realizations=1000)
    assert sweep_realizations(base, 4, 1e-3) == 10000
    base = SimConfig(ChannelDims(1, 4), realizations=10**6)
    assert sweep_realizations(base, 128, 1e-4) == 781250
    assert sweep_realizations(base, 64, 1e-4) == 10**6


def test_sweep_rows_small():
    base = SimConfig(ChannelDims(1, 4), realizations=20000, seed=1)
    rows = scaling_sweep(base, [1, 4], p=1e-3)
    assert [(r.m, r.kind, r.measure) for r in rows][:3] == [
        (1, TR, Measure.ANT), (1, TR, Measure.BS), (1, TR, Measure.RX)]
    assert len(rows) == 18
    by = {(r.m, r.kind, r.measure): r.quantile_db for r in rows}
    for m in (1, 4):
        assert by[m, TR, Measure.BS] == 0.0
        assert by[m, PI, Measure.RX] == 0.0
    assert by[1, TR, Measure.ANT] == 0.0
    assert rows == scaling_sweep(base, [1, 4], p=1e-3, workers=3)
