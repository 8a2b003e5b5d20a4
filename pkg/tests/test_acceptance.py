"""One test per acceptance criterion; each prints a single PASS/FAIL line with the measured values."""
import math

import numpy as np
import pytest

from thzvr import acceptance, delay


def report(capsys, c):
    with capsys.disabled():
        print(f"\n{c.line()}")
    return c


def test_criterion_1_txpdf_matches_simulation(capsys):
    assert report(capsys, acceptance.txpdf_matches_simulation()).passed


def test_criterion_2_zeta_is_derivative(capsys):
    assert report(capsys, acceptance.zeta_is_derivative()).passed


def test_criterion_3_txpdf_normalization(capsys):
    assert report(capsys, acceptance.txpdf_normalization()).passed


def test_criterion_4_mg1_series_oracle(capsys):
    assert report(capsys, acceptance.mg1_series_oracle()).passed


def test_criterion_5_e2e_matches_simulation(capsys):
    assert report(capsys, acceptance.e2e_matches_simulation()).passed


def test_criterion_6_monotonicity(capsys):
    assert report(capsys, acceptance.monotonicity()).passed


def test_criterion_7_headline_numbers(capsys):
    assert report(capsys, acceptance.headline_reproduction()).passed


def test_criterion_8_geometry(capsys):
    c = report(capsys, acceptance.geometry_moments())
    assert c.measured["hard_core_holds"]
    assert c.passed


def test_criterion_9_grid_convergence(capsys):
    assert report(capsys, acceptance.grid_convergence()).passed


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_tampered_exponent_sign_fails_normalization(monkeypatch):
    def flipped(alpha, ch, stats):
        alpha = np.asarray(alpha, dtype=float)
        z = (delay.upsilon(alpha, ch) - stats.mu_I) / stats.sigma_I
        with np.errstate(over="ignore"):
            return delay.zeta(alpha, ch) / (math.sqrt(2 * math.pi) * stats.sigma_I) * np.exp(0.5 * z * z)

    monkeypatch.setattr(delay, "tx_delay_pdf", flipped)
    assert not acceptance.txpdf_normalization().passed


@pytest.mark.parametrize("seed", range(10))
def test_verdicts_do_not_depend_on_seed(seed):
    verdicts = [c.passed for c in acceptance.run_all(seed=1000 + seed, only={1, 5})]
    assert verdicts == [True, True]


@pytest.mark.parametrize("seed", range(3))
def test_geometry_verdict_does_not_depend_on_seed(seed):
    c = acceptance.geometry_moments(seed=2000 + seed)
    assert c.measured["hard_core_holds"]
    assert abs(c.measured["mean_rel_err"]) > acceptance.GEOMETRY_MEAN_REL
