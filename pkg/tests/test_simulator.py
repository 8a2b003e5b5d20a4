import numpy as np
import pytest
from scipy import stats

from thzvr import delay
from thzvr.channel import ChannelParams
from thzvr.delay import QueueParams
from thzvr.geometry import DeploymentParams, gaussian_approximation_error, sample_exact_interference
from thzvr.numerics import Grid, TabulatedDist, ks_against_samples
from thzvr.simulator import (DivergenceError, SimConfig, empirical_dist, merge_summaries, run_tandem)

CH = ChannelParams(d0=0.5)
DEP = DeploymentParams(eta=2.8, r=0.3, omega=10.0)


def cfg(**kw):
    base = dict(channel=CH, deployment=DEP, queue=QueueParams(lambda1=0.1, mu1=200.0), n_requests=20_000, seed=7)
    base.update(kw)
    return SimConfig(**base)


def lindley(arrival, s1, s2):
    """Waiting times of two FCFS single-server queues in series."""
    n = len(arrival)
    w1, w2 = np.zeros(n), np.zeros(n)
    d1 = np.zeros(n)
    done2 = -np.inf
    for i in range(n):
        if i:
            w1[i] = max(0.0, d1[i - 1] - arrival[i])
        d1[i] = arrival[i] + w1[i] + s1[i]
        w2[i] = max(0.0, done2 - d1[i])
        done2 = d1[i] + w2[i] + s2[i]
    return w1, w2


def test_config_validation():
    with pytest.raises(ValueError):
        cfg(n_requests=10, warmup=10)
    with pytest.raises(ValueError):
        cfg(interference_mode="magic")
    assert cfg().warmup == 2000


def test_event_engine_matches_lindley_recursion():
    res = run_tandem(cfg(queue=QueueParams(lambda1=150.0, mu1=200.0), n_requests=5000))
    r = res.records
    w1, w2 = lindley(r["arrival"], r["q1_service"], r["q2_service"])
    assert np.allclose(r["q1_wait"], w1, atol=1e-9)
    assert np.allclose(r["q2_wait"], w2, atol=1e-9)


def test_e2e_is_sum_of_parts_and_reproducible():
    a, b = run_tandem(cfg()), run_tandem(cfg())
    r = a.records
    assert np.array_equal(r["e2e"], r["q1_wait"] + r["q1_service"] + r["q2_wait"] + r["q2_service"])
    for k in r:
        assert np.array_equal(r[k], b.records[k])
    assert a.summary == b.summary
    assert not np.array_equal(r["arrival"], run_tandem(cfg(seed=8)).records["arrival"])


def test_no_request_lost_and_fcfs():
    res = run_tandem(cfg(queue=QueueParams(lambda1=150.0, mu1=200.0), n_requests=5000))
    dep1 = res.q1_departures()
    assert np.all(np.diff(dep1) > 0)
    done2 = dep1 + res.records["q2_wait"] + res.records["q2_service"]
    assert np.all(np.diff(done2) > 0) and np.all(np.isfinite(done2))


def test_light_load_has_no_queueing():
    res = run_tandem(cfg(queue=QueueParams(lambda1=1e-3, mu1=200.0), n_requests=5000))
    assert res.steady("q1_wait").mean() < 1e-4
    assert res.steady("q2_wait").mean() < 1e-6


def test_q1_sojourn_is_exponential():
    q = QueueParams(lambda1=100.0, mu1=200.0)
    res = run_tandem(cfg(queue=q, n_requests=111_112))
    soj = res.steady("q1_wait") + res.steady("q1_service")
    assert stats.kstest(soj, "expon", args=(0, 1 / 100.0)).statistic < 0.01


def test_burke_departures_are_poisson():
    q = QueueParams(lambda1=100.0, mu1=200.0)
    res = run_tandem(cfg(queue=q, n_requests=111_112))
    gaps = np.diff(res.q1_departures()[res.config.warmup:])
    assert stats.kstest(gaps, "expon", args=(0, 1 / 100.0)).statistic < 0.01


def test_q2_wait_matches_analytic_series_under_load():
    q = QueueParams(lambda1=100.0, mu1=200.0)
    res = run_tandem(cfg(queue=q, n_requests=111_112))
    stats_ = res.config.gaussian_stats
    an = delay.e2e_analysis(q, CH, stats_)
    assert ks_against_samples(an.Psi_Q2, res.steady("q2_wait")) < 0.02
    assert ks_against_samples(an.Phi, res.e2e) < 0.02


def test_empirical_reliability_matches_analytic():
    res = run_tandem(cfg(n_requests=111_112))
    an = delay.e2e_analysis(res.config.queue, CH, res.config.gaussian_stats, delta_max=0.03)
    for d in (0.01, 0.02, 0.03):
        assert abs(res.reliability(d) - an.reliability(d)) < 0.005


def test_q2_instability_detected():
    with pytest.raises(delay.StabilityError):
        run_tandem(cfg(queue=QueueParams(lambda1=500.0, mu1=1000.0), n_requests=2000))


def test_divergence_cap():
    with pytest.raises(DivergenceError):
        run_tandem(cfg(queue=QueueParams(lambda1=199.0, mu1=200.0), n_requests=20_000, queue_cap=3))


def test_exact_geometry_modes_run():
    ch = ChannelParams(d0=2.3)
    dep = DeploymentParams(eta=0.0094, r=4.1, omega=10.0)
    res = run_tandem(cfg(channel=ch, deployment=dep, n_requests=400, interference_mode="exact_geometry"))
    assert np.unique(res.records["q2_service"]).size > 5
    frozen = run_tandem(cfg(channel=ch, deployment=dep, n_requests=400, interference_mode="exact_geometry_frozen"))
    assert np.unique(frozen.records["q2_service"]).size == 1
    # arrivals and processing come from their own streams
    assert np.array_equal(res.records["arrival"], frozen.records["arrival"])
    assert np.array_equal(res.records["q1_service"], frozen.records["q1_service"])


def test_mode_gap_bounded_by_gaussian_error():
    """A monotone map and an independent sum cannot grow a KS gap, so the reliability
    difference between modes is at most the interference KS error (plus MC noise)."""
    ch = ChannelParams(d0=2.3)
    dep = DeploymentParams(eta=0.0094, r=4.1, omega=10.0)
    n = 3000
    g = run_tandem(cfg(channel=ch, deployment=dep, n_requests=n, warmup=0))
    e = run_tandem(cfg(channel=ch, deployment=dep, n_requests=n, warmup=0, interference_mode="exact_geometry"))
    ks_I = gaussian_approximation_error(sample_exact_interference(dep, ch.p, ch.A0, 3, 3000), g.config.gaussian_stats)
    noise = 3 * np.sqrt(0.5 / n) * 2
    for d in np.quantile(g.e2e, [0.1, 0.5, 0.9]):
        assert abs(g.reliability(d) - e.reliability(d)) <= ks_I + noise


def test_merge_is_order_independent():
    rs = [run_tandem(cfg(seed=s, n_requests=3000)) for s in (1, 2, 3)]
    a = merge_summaries(rs)
    b = merge_summaries(rs[::-1])
    assert a == b and a["replications"] == 3 and a["n"] == 3 * 2700
    with pytest.raises(ValueError):
        merge_summaries([])


def test_csv_provenance(tmp_path):
    res = run_tandem(cfg(n_requests=100))
    text = res.to_csv(tmp_path / "r.csv")
    assert "# seed: 7" in text and "# channel.d0: 0.5" in text and "# summary.mean_e2e" in text
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    assert lines[0] == "request,steady,arrival,q1_wait,q1_service,q2_wait,q2_service,e2e"
    assert len(lines) == 101
    assert "mean_q1_delay:" in res.summary_text()


def test_empirical_dist_point_mass_and_ecdf():
    g = Grid.covering(1.0, 11)
    pdf, ecdf = empirical_dist([0.3] * 50, g)
    assert np.count_nonzero(pdf.values) == 1 and pdf.mass() == pytest.approx(1.0)
    assert np.all(np.diff(ecdf.values) >= 0) and ecdf.values[-1] == 1.0
    with pytest.raises(ValueError):
        empirical_dist([], g)


def test_ecdf_of_exponential():
    g = Grid.covering(15.0, 3001)
    x = np.random.default_rng(1).exponential(size=100_000)
    _, ecdf = empirical_dist(x, g)
    exact = TabulatedDist(g, -np.expm1(-g.t), "cdf")
    assert np.max(np.abs(ecdf.values - exact.values)) < 0.01
