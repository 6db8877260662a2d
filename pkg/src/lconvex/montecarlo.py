"""Monte Carlo estimates of the vertex count and missed area of random L-polygons."""

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .body import SmoothBody, validate_pair
from .lhull import lhull

THREADS_ENV = "LCONVEX_WORKERS"


@dataclass(frozen=True)
class SimulationEstimate:
    n: int
    trials: int
    mean: float
    stderr: float
    seed: int
    wall_time: float

    def within(self, target, sigmas=3.0):
        return abs(self.mean - target) <= sigmas * self.stderr

    def as_dict(self):
        return asdict(self)


def trial_rng(seed, trial):
    """Counter-based stream for one trial; independent of scheduling."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(trial)])))


def _bounding_box(K: SmoothBody):
    h = K.support(np.array([0.0, 0.5 * np.pi, np.pi, 1.5 * np.pi]))
    return np.array([-h[2], -h[3]]), np.array([h[0], h[1]])


def sample_uniform(K: SmoothBody, count, seed=0, rng=None, return_rate=False):
    """Uniform points in K by rejection from the support-function bounding box."""
    rng = np.random.default_rng(seed) if rng is None else rng
    lo, hi = _bounding_box(K)
    rate_guess = K.area / float(np.prod(hi - lo))
    out, drawn, kept = [], 0, 0
    while kept < count:
        m = int((count - kept) / rate_guess * 1.1) + 16
        cand = lo + (hi - lo) * rng.random((m, 2))
        inside = cand[K.margin(cand, stride=4) <= 0.0]
        drawn += m
        kept += len(inside)
        out.append(inside)
    pts = np.concatenate(out)[:count]
    if return_rate:
        return pts, kept / drawn
    return pts


def _same_body(K, L):
    return K is L or (K.a0 == L.a0 and np.array_equal(K._a, L._a) and np.array_equal(K._b, L._b))


def _check_regime(K, L):
    if not _same_body(K, L):
        validate_pair(K, L, strict=False)


def _trial(K, L, n, seed, trial):
    rng = trial_rng(seed, trial)
    X = sample_uniform(K, n, rng=rng)
    P = lhull(X, L)
    return P.f0, K.area - P.area


def _efron_trial(K, L, n, seed, trial):
    rng = trial_rng(seed, trial)
    X = sample_uniform(K, n, rng=rng)
    f0 = lhull(X, L).f0
    missed = K.area - lhull(X[:-1], L).area
    return f0, missed


def _chunk(args):
    fn, K, L, n, seed, trials = args
    return [fn(K, L, n, seed, t) for t in trials]


def _workers(workers):
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(workers))


def _run(fn, K, L, n, trials, seed, workers=None):
    workers = _workers(workers)
    idx = list(range(trials))
    if workers == 1 or trials < 2 * workers:
        rows = _chunk((fn, K, L, n, seed, idx))
    else:
        parts = [idx[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as ex:
            res = list(ex.map(_chunk, [(fn, K, L, n, seed, p) for p in parts]))
        rows = [None] * trials
        for p, r in zip(parts, res):
            for t, v in zip(p, r):
                rows[t] = v
    return np.array(rows, dtype=float).reshape(trials, 2)


def _estimate(values, n, seed, wall):
    values = np.asarray(values, dtype=float)
    trials = len(values)
    mean = float(np.sum(values) / trials)
    stderr = float(np.std(values, ddof=1) / np.sqrt(trials)) if trials > 1 else float("nan")
    return SimulationEstimate(int(n), int(trials), mean, stderr, int(seed), float(wall))


def simulate(K: SmoothBody, L: SmoothBody, n, trials=2000, seed=0, workers=None):
    """Both estimates from one set of trials: (f0 estimate, missed-area estimate)."""
    if n < 2:
        raise ValueError("need n >= 2")
    _check_regime(K, L)
    t0 = time.perf_counter()
    rows = _run(_trial, K, L, n, trials, seed, workers)
    wall = time.perf_counter() - t0
    return _estimate(rows[:, 0], n, seed, wall), _estimate(rows[:, 1], n, seed, wall)


def simulate_f0(K, L, n, trials=2000, seed=0, workers=None) -> SimulationEstimate:
    return simulate(K, L, n, trials, seed, workers)[0]


def simulate_missed_area(K, L, n, trials=2000, seed=0, workers=None) -> SimulationEstimate:
    return simulate(K, L, n, trials, seed, workers)[1]


@dataclass(frozen=True)
class EfronReport:
    n: int
    trials: int
    mean_f0: float
    mean_rhs: float
    difference: float
    stderr: float
    seed: int
    passed: bool

    def as_dict(self):
        return asdict(self)


def efron_check(K: SmoothBody, L: SmoothBody, n, trials=2000, seed=0, workers=None, sigmas=3.0):
    """Paired check of E f0(n) = n E[A(K minus hull of n-1 points)] / A(K).

    Each trial hulls n points and the first n-1 of them; the per-trial
    difference gives a paired standard error.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    _check_regime(K, L)
    rows = _run(_efron_trial, K, L, n, trials, seed, workers)
    f0 = rows[:, 0]
    rhs = n * rows[:, 1] / K.area
    diff = f0 - rhs
    se = float(np.std(diff, ddof=1) / np.sqrt(trials))
    d = float(np.sum(diff) / trials)
    return EfronReport(int(n), int(trials), float(np.mean(f0)), float(np.mean(rhs)), d, se, int(seed),
                       bool(abs(d) <= sigmas * se))


CSV_FIELDS = ["n", "trials", "mean_f0", "stderr_f0", "mean_missed", "stderr_missed", "seed"]


def write_csv(path, rows):
    """``rows``: iterable of (f0 estimate, missed-area estimate) pairs."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for f0, missed in rows:
            w.writerow([f0.n, f0.trials, repr(f0.mean), repr(f0.stderr),
                        repr(missed.mean), repr(missed.stderr), f0.seed])


__all__ = [
    "SimulationEstimate",
    "EfronReport",
    "sample_uniform",
    "simulate",
    "simulate_f0",
    "simulate_missed_area",
    "efron_check",
    "trial_rng",
    "write_csv",
]
