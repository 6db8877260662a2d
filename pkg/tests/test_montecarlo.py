import csv

import numpy as np
import pytest
from scipy.stats import chisquare

from lconvex import SmoothBody
from lconvex.montecarlo import (
    efron_check,
    sample_uniform,
    simulate,
    simulate_f0,
    trial_rng,
    write_csv,
)


def test_disc_sampling():
    D = SmoothBody.disc(1.0)
    pts, rate = sample_uniform(D, 40000, seed=3, return_rate=True)
    assert pts.shape == (40000, 2)
    assert np.all(np.hypot(*pts.T) <= 1 + 1e-12)
    assert rate == pytest.approx(np.pi / 4, abs=0.01)
    assert np.allclose(pts.mean(axis=0), 0, atol=0.015)
    # radial CDF r^2 and uniform angle, 8 x 8 cells
    r2 = np.hypot(*pts.T) ** 2
    ang = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi)
    H, _, _ = np.histogram2d(r2, ang, bins=8, range=[[0, 1], [0, 2 * np.pi]])
    assert chisquare(H.ravel()).pvalue > 1e-3


def test_sampling_generic_body(generic_L):
    pts = sample_uniform(generic_L, 5000, seed=1)
    assert np.all(generic_L.margin(pts) <= 0)
    B = generic_L.boundary_point(np.linspace(0, 2 * np.pi, 4000, endpoint=False))
    x, y = B.T
    cr = x * np.roll(y, -1) - np.roll(x, -1) * y
    c = np.array([np.sum((x + np.roll(x, -1)) * cr), np.sum((y + np.roll(y, -1)) * cr)]) / (3 * cr.sum())
    assert np.allclose(pts.mean(axis=0), c, atol=0.03)


def test_two_points_always_two_vertices(disc_pair):
    est = simulate_f0(*disc_pair, 2, trials=50)
    assert est.mean == 2.0 and est.stderr == 0.0


def test_reproducible_and_worker_independent(disc_pair):
    a = simulate(*disc_pair, 30, trials=40, seed=11)
    b = simulate(*disc_pair, 30, trials=40, seed=11)
    c = simulate(*disc_pair, 30, trials=40, seed=11, workers=2)
    assert a[0].mean == b[0].mean == c[0].mean
    assert a[1].mean == c[1].mean
    d = simulate(*disc_pair, 30, trials=40, seed=12)
    assert d[0].mean != a[0].mean


def test_trial_streams_distinct():
    x = trial_rng(0, 0).random(4)
    y = trial_rng(0, 1).random(4)
    assert not np.allclose(x, y)
    assert np.array_equal(x, trial_rng(0, 0).random(4))


def test_LL_scale_invariance(generic_L):
    a = simulate_f0(generic_L, generic_L, 40, trials=30, seed=5)
    b = simulate_f0(generic_L.scaled(3.0), generic_L.scaled(3.0), 40, trials=30, seed=5)
    # same uniforms scaled by 3 (bounding box scales too): identical vertex counts
    assert a.mean == b.mean


def test_efron_small(disc_pair):
    r = efron_check(*disc_pair, 20, trials=400, seed=2)
    assert r.passed
    assert r.mean_f0 > 3


def test_rejects_bad_input(disc_pair):
    with pytest.raises(ValueError):
        simulate(*disc_pair, 1)
    with pytest.raises(ValueError):
        efron_check(*disc_pair, 2)


def test_csv(tmp_path, disc_pair):
    rows = [simulate(*disc_pair, n, trials=10) for n in (5, 10)]
    p = tmp_path / "mc.csv"
    write_csv(p, rows)
    data = list(csv.DictReader(open(p)))
    assert [int(r["n"]) for r in data] == [5, 10]
    assert float(data[0]["mean_f0"]) == rows[0][0].mean
