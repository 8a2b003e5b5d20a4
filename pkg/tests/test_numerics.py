import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs
from scipy import stats

from thzvr.numerics import (Grid, GridMismatchError, TabulatedDist, convolve, interpolate, ks_against_samples,
                            ks_distance, l1_distance, nfold, nfold_series, quadrature, unit_step)


def exp_pdf(grid, rate):
    return TabulatedDist(grid, rate * np.exp(-rate * grid.t), "pdf", f"exp{rate}")


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(0.0, 10)
    with pytest.raises(ValueError):
        Grid(0.1, 1)
    g = Grid.covering(2.0, 201)
    assert g.horizon == pytest.approx(2.0)
    assert g.refined(2).h == pytest.approx(g.h / 2)
    assert g.refined(2).horizon == pytest.approx(2.0)


def test_quadrature_of_constant():
    g = Grid.covering(3.5, 101)
    assert quadrature(np.ones(101), g.h) == pytest.approx(3.5, rel=1e-14)


def test_convolution_with_step_is_running_integral():
    g = Grid.covering(10.0, 2001)
    a = exp_pdf(g, 1.3)
    out = convolve(a, unit_step(g))
    assert out.kind == "cdf"
    assert np.max(np.abs(out.values - (1 - np.exp(-1.3 * g.t)))) < 1e-6


def test_hypoexponential_oracle():
    a, b = 2.0, 5.0
    g = Grid(1e-3 / max(a, b), 40001)
    out = convolve(exp_pdf(g, a), exp_pdf(g, b))
    exact = a * b / (b - a) * (np.exp(-a * g.t) - np.exp(-b * g.t))
    assert out.kind == "pdf"
    assert np.max(np.abs(out.values - exact)) < 1e-4


def test_convolution_commutes():
    g = Grid.covering(5.0, 1001)
    x = TabulatedDist(g, stats.gamma.pdf(g.t, 2.5), "pdf")
    y = exp_pdf(g, 0.7)
    assert np.max(np.abs(convolve(x, y).values - convolve(y, x).values)) < 1e-12


def test_grid_mismatch_raises():
    with pytest.raises(GridMismatchError):
        convolve(exp_pdf(Grid(0.1, 11), 1.0), exp_pdf(Grid(0.2, 11), 1.0))
    with pytest.raises(ValueError):
        convolve(unit_step(Grid(0.1, 11)), unit_step(Grid(0.1, 11)))


def test_tail_mass_reported():
    g = Grid.covering(2.0, 2001)
    out = convolve(exp_pdf(g, 1.0), exp_pdf(g, 1.0))
    a_mass = 1 - np.exp(-2.0)
    true_inside = stats.gamma.cdf(2.0, 2)
    assert out.meta["tail_mass"] == pytest.approx(a_mass**2 - true_inside, abs=1e-6)


def test_nfold_identities():
    g = Grid.covering(3.0, 3001)
    u = TabulatedDist(g, (g.t <= 1.0).astype(float), "pdf", "uniform")
    assert np.all(nfold(u, 0).values == 1.0)
    cdf = u.to_cdf()
    assert np.max(np.abs(nfold(cdf, 1).values - cdf.values)) < 1e-12
    with pytest.raises(ValueError):
        nfold(u, -1)


def test_irwin_hall_order_two():
    g = Grid.covering(3.0, 6001)
    u = TabulatedDist(g, np.clip(g.t, 0.0, 1.0), "cdf", "uniform")
    t = g.t
    exact = np.where(t <= 1, t**2 / 2, np.where(t <= 2, 1 - (2 - t) ** 2 / 2, 1.0))
    assert np.max(np.abs(nfold(u, 2).values - exact)) < 1e-4


def test_nfold_series_matches_erlang_mixture():
    g = Grid.covering(20.0, 8001)
    w = [0.5, 0.25, 0.125]
    out = nfold_series(exp_pdf(g, 1.0), w)
    exact = w[0] + w[1] * stats.gamma.cdf(g.t, 1) + w[2] * stats.gamma.cdf(g.t, 2)
    assert np.max(np.abs(out.values - exact)) < 1e-6


def test_distances():
    g = Grid.covering(5.0, 501)
    a = exp_pdf(g, 1.0)
    assert ks_distance(a, a) == 0.0
    assert l1_distance(a, a) == 0.0
    b = exp_pdf(g, 2.0)
    assert l1_distance(a, b) == pytest.approx(0.5, abs=5e-3)  # 2 (F_b - F_a) at the crossing ln 2
    with pytest.raises(ValueError):
        l1_distance(a.to_cdf(), b)


def test_ks_of_exponential_sample():
    rng = np.random.default_rng(3)
    g = Grid.covering(15.0, 15001)
    ks = ks_against_samples(exp_pdf(g, 1.0), rng.exponential(size=100_000))
    ref = stats.kstest(rng.exponential(size=100_000), "expon").statistic
    assert ks < 0.01 and ref < 0.01


def test_ks_against_samples_matches_scipy():
    rng = np.random.default_rng(8)
    x = rng.exponential(size=2000)
    g = Grid.covering(20.0, 200001)
    assert ks_against_samples(exp_pdf(g, 1.0), x) == pytest.approx(stats.kstest(x, "expon").statistic, abs=1e-6)


def test_csv_round_trip(tmp_path):
    g = Grid.covering(1.0, 11)
    d = TabulatedDist(g, np.linspace(0, 1, 11), "cdf", "ramp", {"source": "test"})
    p = tmp_path / "d.csv"
    text = d.to_csv(p, {"seed": 4})
    assert text.startswith("# distribution: ramp")
    back = TabulatedDist.from_csv(str(p))
    assert back.kind == "cdf" and back.grid.same_as(g)
    assert np.array_equal(back.values, d.values)
    assert back.meta["seed"] == "4"


def test_interpolate_outside_grid():
    g = Grid.covering(1.0, 11)
    cdf = TabulatedDist(g, np.linspace(0, 0.9, 11), "cdf")
    assert interpolate(cdf, 5.0) == pytest.approx(0.9)
    pdf = TabulatedDist(g, np.ones(11), "pdf")
    assert interpolate(pdf, 5.0) == 0.0


@settings(max_examples=25, deadline=None)
@given(hs.floats(0.5, 5.0), hs.floats(0.5, 5.0))
def test_convolution_preserves_mass_and_mean(a, b):
    g = Grid.covering(40.0 / min(a, b), 4001)
    out = convolve(exp_pdf(g, a), exp_pdf(g, b))
    assert out.mass() + out.meta["tail_mass"] == pytest.approx(exp_pdf(g, a).mass() * exp_pdf(g, b).mass(), abs=1e-9)
    assert out.mean() == pytest.approx(1 / a + 1 / b, rel=1e-4)


@settings(max_examples=25, deadline=None)
@given(hs.floats(0.2, 4.0))
def test_pdf_cdf_convolution_is_monotone(rate):
    g = Grid.covering(10.0, 1001)
    out = convolve(exp_pdf(g, rate), exp_pdf(g, 1.0).to_cdf())
    assert np.all(np.diff(out.values) >= 0) and out.values[-1] <= 1.0 + 1e-12


def test_ks_handles_atom_at_zero():
    rng = np.random.default_rng(4)
    x = np.where(rng.random(50_000) < 0.4, 0.0, rng.exponential(size=50_000))
    g = Grid.covering(20.0, 20001)
    cdf = TabulatedDist(g, 0.4 + 0.6 * -np.expm1(-g.t), "cdf")
    assert ks_against_samples(cdf, x) < 0.01
    assert ks_against_samples(TabulatedDist(g, -np.expm1(-g.t), "cdf"), x) > 0.35
