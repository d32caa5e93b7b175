"""Acceptance suite: one test per numbered criterion.

Every test records its outcome through the ``criterion`` fixture before
asserting, so the terminal summary lists all thirteen lines even when some
fail.  Run with ``pytest tests/test_acceptance.py -v``.
"""

import math
import subprocess
import sys
import time

import numpy as np
from scipy import optimize, stats

from moore_rs import interval as iv
from moore_rs.diagnostics import acceptance_sweep, lmhs_bw_experiment, mse_protocol
from moore_rs.envelope import Partition
from moore_rs.errors import ExtensionUndefined
from moore_rs.exprdag import parse
from moore_rs.interval import Box
from moore_rs.sampler import TrioSampler
from moore_rs.targets import (DEMO_FORMULA, NAMED_TARGETS, build_target, named_spec, quadrature,
                              true_mean_oracle)

from oracles import (MP_FUNCS, exact_binary, exact_pow, mixture_bin_probs, mp_fn,
                     needle_marginal_cdf, random_box, random_formula, random_interval, within)


def _se(p, n):
    return math.sqrt(max(p * (1 - p), 0.0) / n)


def _pick(rng, lo, hi):
    """A point of [lo, hi]: an endpoint 20% of the time, else interior."""
    u = rng.random()
    if u < 0.1:
        return lo
    if u > 0.9:
        return hi
    return min(max(lo + (hi - lo) * u, lo), hi)


# -- 1 -------------------------------------------------------------------------

_BINARY = {"+": iv.add, "-": iv.sub, "*": iv.mul, "/": iv.div}
_FUNCS = sorted(MP_FUNCS)
_FAST_GROWTH = ("exp", "sinh", "cosh")


def _interval_case(rng):
    """One random case; returns (violation or None, declined flag)."""
    r = rng.random()
    if r < 0.5:
        op = "+-*/"[int(r * 8)]
        (a0, a1), (b0, b1) = random_interval(rng), random_interval(rng)
        x, y = _pick(rng, a0, a1), _pick(rng, b0, b1)
        try:
            R = _BINARY[op](iv.Interval(a0, a1), iv.Interval(b0, b1))
        except ExtensionUndefined:
            # only division by an interval holding zero may refuse
            return (None if op == "/" and b0 <= 0 <= b1 else (op, a0, a1, b0, b1)), True
        return (None if within(R.lo, R.hi, exact_binary(op, x, y)) else (op, a0, a1, b0, b1, x, y)), False
    if r < 0.6:
        n = int(rng.integers(-4, 7))
        a0, a1 = random_interval(rng, (-6, 6))
        x = _pick(rng, a0, a1)
        try:
            R = iv.pow_int(iv.Interval(a0, a1), n)
        except ExtensionUndefined:
            return (None if n < 0 and a0 <= 0 <= a1 else ("^", n, a0, a1)), True
        return (None if within(R.lo, R.hi, exact_pow(x, n)) else ("^", n, a0, a1, x)), False
    name = _FUNCS[int((r - 0.6) / 0.4 * len(_FUNCS))]
    a0, a1 = random_interval(rng, (-8, 2.8) if name in _FAST_GROWTH else (-8, 8))
    if name in ("log", "sqrt"):
        a0, a1 = sorted((abs(a0), abs(a1)))
        if name == "log" and a0 == 0.0:
            a0, a1 = 5e-324, max(a1, 5e-324)
    elif name in ("asin", "acos"):
        a0, a1 = min(max(a0, -1.0), 1.0), min(max(a1, -1.0), 1.0)
    x = _pick(rng, a0, a1)
    try:
        R = iv.std_fn(name, iv.Interval(a0, a1))
    except ExtensionUndefined:
        # tan refuses near poles and on wide or huge arguments; nothing else may
        return (None if name == "tan" else (name, a0, a1)), True
    return (None if within(R.lo, R.hi, mp_fn(name, x)) else (name, a0, a1, x)), False


def test_c01_interval_soundness_fuzz(criterion):
    rng = np.random.default_rng(20240101)
    t0 = time.process_time()
    violations, declined = [], 0
    for _ in range(1_000_000):
        bad, refused = _interval_case(rng)
        declined += refused
        if bad is not None:
            violations.append(bad)
    elapsed = time.process_time() - t0
    ok = not violations and elapsed < 60
    criterion(1, "interval soundness fuzz", ok,
              f"10^6 cases, {len(violations)} violations, {declined} refused, {elapsed:.1f} s")
    assert ok, violations[:5]


# -- 2 -------------------------------------------------------------------------

def test_c02_natural_extension_inclusion_fuzz(criterion):
    rng = np.random.default_rng(20240102)
    inclusion = isotony = undefined = 0
    for _ in range(100_000):
        n = int(rng.integers(1, 4))
        f = parse(random_formula(rng, n, 4), n)
        dims = random_box(rng, n)
        try:
            F = f.eval_interval(Box(dims))
        except ExtensionUndefined:
            undefined += 1
            continue
        for _ in range(10):
            x = [_pick(rng, lo, hi) for lo, hi in dims]
            v = f.eval_point(x)
            inclusion += not (F.lo <= v <= F.hi)
        s, t = rng.random(n) / 2, 0.5 + rng.random(n) / 2
        inner = Box([(lo + (hi - lo) * a, min(lo + (hi - lo) * b, hi))
                     for (lo, hi), a, b in zip(dims, s, t)])
        isotony += not iv.subset(f.eval_interval(inner), F)
    ok = inclusion == 0 and isotony == 0
    criterion(2, "natural-extension inclusion fuzz", ok,
              f"10^5 DAGs, {inclusion} inclusion and {isotony} isotony violations, "
              f"{undefined} undefined extensions")
    assert ok


# -- 3 -------------------------------------------------------------------------

def test_c03_envelope_domination(criterion):
    rng = np.random.default_rng(20240103)
    violations, checked = {}, 0
    for name in sorted(NAMED_TARGETS):
        spec = named_spec(name)
        f = build_target(spec)
        dom = spec.domain
        lo, hi = np.array(dom.lo), np.array(dom.hi)
        p = Partition(f, dom, "integral")
        for size in (1, 10, 100, 1000):
            p.refine_to(size)
            X = lo + rng.random((10_000, dom.n)) * (hi - lo)
            if name == "g5hat":
                # uniform probes over +-1e100 never land near the modes; send half there
                X[::2] = rng.uniform(-20, 20, (5000, 1))
            env = p.envelope_values(X)
            vals = np.array([f.eval_point(x) for x in X])
            bad = int(np.sum(env < vals))
            checked += X.shape[0]
            if bad:
                violations[(name, size)] = bad
    ok = not violations
    criterion(3, "envelope domination", ok,
              f"{len(NAMED_TARGETS)} targets x 4 sizes, {checked} probes, violations {violations or 0}")
    assert ok


# -- 4 -------------------------------------------------------------------------

def test_c04_guaranteed_bound_rate(criterion):
    t0 = time.process_time()
    p = Partition(parse(DEMO_FORMULA, 1), Box.cube(-10, 6, 1), "volume")
    Ws = [2 ** k for k in range(2, 13)]
    gaps = []
    for W in Ws:
        p.refine_to(W)
        gaps.append(1.0 - p.acceptance_bounds().lo)
    elapsed = time.process_time() - t0
    slope = np.polyfit(np.log(Ws), np.log(gaps), 1)[0]
    tail = np.polyfit(np.log(Ws[-5:]), np.log(gaps[-5:]), 1)[0]
    ok = slope <= -0.9 and elapsed < 30
    criterion(4, "guaranteed-bound rate", ok,
              f"slope {slope:.3f} over W=4..4096 (W>=256: {tail:.3f}), "
              f"gaps {', '.join(f'{g:.3g}' for g in gaps)}, {elapsed:.1f} s")
    assert ok


# -- 5 -------------------------------------------------------------------------

def _quantile_edges(cdf, lo, hi, k):
    inner = [optimize.brentq(lambda x, q=q: cdf(x) - q, lo, hi, xtol=1e-13)
             for q in np.arange(1, k) / k]
    return np.array([lo, *inner, hi])


def _mixture_cdf(spec):
    total = sum(w for w, _, _ in spec.components)
    return lambda x: sum(w * 0.5 * (1 + math.erf((x - mu[0]) / (s[0] * math.sqrt(2))))
                         for w, mu, s in spec.components) / total


def test_c05_mrs_samples_follow_target(criterion):
    # g2: equal-probability bins, probabilities by per-bin quadrature
    spec = named_spec("g2")
    f = build_target(spec)
    edges = _quantile_edges(_mixture_cdf(spec), -100.0, 100.0, 50)
    masses = np.array([quadrature(f, Box([(a, b)]), spec.breakpoints, 16, 8)[0]
                       for a, b in zip(edges[:-1], edges[1:])])
    probs = masses / masses.sum()
    assert np.allclose(probs, mixture_bin_probs(spec, edges), atol=1e-9)
    p = Partition(f, spec.domain, "integral").refine_to(1000)
    b = TrioSampler(f, p, 51).draw_until(10_000)
    x = b.points[b.mrs, 0]
    p_g2 = stats.chisquare(np.histogram(x, edges)[0], probs * x.size).pvalue

    # needle with sigma2 = 0.01: x1 marginal
    spec = named_spec("needle", sigma2=0.01)
    f = build_target(spec)
    edges = _quantile_edges(lambda t: needle_marginal_cdf(t, spec), -10.0, 10.0, 30)
    probs = np.diff([needle_marginal_cdf(e, spec) for e in edges])
    probs /= probs.sum()
    p = Partition(f, spec.domain, "integral").refine_to(1000)
    b = TrioSampler(f, p, 52).draw_until(10_000)
    x = b.points[b.mrs, 0]
    p_needle = stats.chisquare(np.histogram(x, edges)[0], probs * x.size).pvalue

    ok = p_g2 > 0.001 and p_needle > 0.001
    criterion(5, "MRS samples follow the target", ok,
              f"g2 50-bin p={p_g2:.3f}, needle x1 30-bin p={p_needle:.3f}")
    assert ok


# -- 6 -------------------------------------------------------------------------

def test_c06_scheme_ordering(criterion):
    spec = named_spec("g5")
    f = build_target(spec)
    acc = {}
    for k, scheme in enumerate(("integral", "range", "volume")):
        p = Partition(f, spec.domain, scheme).refine_to(100)
        b = TrioSampler(f, p, 60 + k).draw(20_000)
        acc[scheme] = (b.acceptance, _se(b.acceptance, len(b)))

    def at_least(a, b):
        return acc[a][0] >= acc[b][0] - 3 * math.hypot(acc[a][1], acc[b][1])

    ok = at_least("integral", "range") and at_least("range", "volume")
    criterion(6, "scheme ordering on g5", ok,
              ", ".join(f"{s} {a:.4f}+-{e:.4f}" for s, (a, e) in acc.items()) + " (20000 trials each)")
    assert ok


# -- 7 -------------------------------------------------------------------------

def test_c07_needle_benchmark(criterion):
    spec = named_spec("needle", sigma2=1e-10)
    f = build_target(spec)
    p = Partition(f, spec.domain, "integral").refine_to(120)
    b = TrioSampler(f, p, 70).draw(20_000)
    ok = b.acceptance >= 0.30
    criterion(7, "needle sigma2=1e-10 at 120 boxes", ok,
              f"acceptance {b.acceptance:.4f}+-{_se(b.acceptance, len(b)):.4f} over {len(b)} trials, "
              f"guaranteed bound {p.acceptance_bounds().lo:.4f}")
    assert ok


# -- 8 -------------------------------------------------------------------------

def test_c08_levy_benchmark(criterion):
    spec = named_spec("levy")
    f = build_target(spec)
    t0 = time.perf_counter()
    p = Partition(f, spec.domain, "integral").refine_to(150)
    b = TrioSampler(f, p, 80).draw_until(10_000)
    elapsed = time.perf_counter() - t0
    ok = 0.003 <= b.acceptance <= 0.03 and b.n_accepted == 10_000 and elapsed < 120
    criterion(8, "Levy T=40 at 150 boxes", ok,
              f"acceptance {b.acceptance:.5f} over {len(b)} trials, "
              f"{b.n_accepted} samples in {elapsed:.1f} s")
    assert ok


# -- 9 -------------------------------------------------------------------------

def test_c09_needle_mean_recovery(criterion):
    spec = named_spec("needle", sigma2=0.01)
    f = build_target(spec)
    true_mean = np.array(true_mean_oracle(spec, n_grid=16, order=6))
    p = Partition(f, spec.domain, "integral")
    low = mse_protocol(f, p.refine_to(50), true_mean, 100, 500, seed=90)
    high = mse_protocol(f, p.refine_to(3000), true_mean, 100, 500, seed=91)

    est = high.estimates["mrs"]
    z = np.abs(est.mean(axis=0) - true_mean) / (est.std(axis=0, ddof=1) / math.sqrt(len(est)))
    mean_ok = bool(np.all(z <= 3))
    low_ok = low.mse_is <= low.mse_mrs
    mses = (high.mse_mrs, high.mse_is, high.mse_imhs)
    high_ok = high.acceptance >= 0.5 and max(mses) <= 2 * min(mses)
    ok = mean_ok and low_ok and high_ok
    criterion(9, "needle mean recovery and MSE pattern", ok,
              f"oracle mean {np.round(true_mean, 6).tolist()}, MRS |z| max {z.max():.2f}; "
              f"acc {low.acceptance:.3f}: mse mrs/is/imhs {low.mse_mrs:.4f}/{low.mse_is:.4f}/"
              f"{low.mse_imhs:.4f}; acc {high.acceptance:.3f}: {mses[0]:.4f}/{mses[1]:.4f}/"
              f"{mses[2]:.4f}")
    assert ok


# -- 10 ------------------------------------------------------------------------

def test_c10_lmhs_misses_the_needle(criterion):
    spec = named_spec("needle", sigma2=0.006)
    f = build_target(spec)
    hits, burns = 0, []
    for rep in range(20):
        r = lmhs_bw_experiment(f, spec.domain, 6 * spec.sigma1, seed=rep, n_chains=4)
        fired = r.burn_in is not None
        burns.append(r.burn_in)
        hits += fired and bool(np.all(np.abs(r.post_means[:, 0]) <= 0.2))
    ok = hits >= 10
    criterion(10, "LMHS stops early and misses the needle", ok,
              f"{hits}/20 replicates fired with all chain means of x1 in [-0.2, 0.2]; "
              f"burn-in range {min(b for b in burns if b)}..{max(b for b in burns if b)}")
    assert ok


# -- 11 ------------------------------------------------------------------------

def test_c11_witchs_hat(criterion):
    spec = named_spec("witch")
    f = build_target(spec)
    p = Partition(f, spec.domain, "integral")
    reached, acc = None, 0.0
    for size in (10, 30, 100, 300, 1000, 3000, 10_001):
        p.refine_to(size)
        b = TrioSampler(f, p, 110 + size).draw(10_000)
        acc = b.acceptance
        if acc >= 0.1:
            reached = len(p)
            break
    oracle = np.array(true_mean_oracle(spec))
    b = TrioSampler(f, p, 111).draw_until(10_000)
    x = b.points[b.mrs]
    z = np.abs(x.mean(axis=0) - oracle) / (x.std(axis=0, ddof=1) / math.sqrt(len(x)))
    ok = reached is not None and bool(np.all(z <= 3))
    criterion(11, "witch's hat acceptance and mean", ok,
              f"acceptance {acc:.3f} at {reached} boxes ({(reached or 1) - 1} refinements), "
              f"oracle mean {np.round(oracle, 6).tolist()}, sample mean "
              f"{np.round(x.mean(axis=0), 4).tolist()}, |z| max {z.max():.2f}")
    assert ok


# -- 12 ------------------------------------------------------------------------

def test_c12_rosenbrock_scaling(criterion):
    ok, parts = True, []
    for D in (2, 3):
        spec = named_spec("rosenbrock", D=D)
        curve = acceptance_sweep(build_target(spec), spec.domain, "integral",
                                 [100, 1000, 10_000], max_accepts=10_000, max_trials=100_000,
                                 seed=120 + D)
        for a, b in zip(curve, curve[1:]):
            ok &= b.empirical_acceptance >= a.empirical_acceptance - 3 * math.hypot(
                a.standard_error, b.standard_error)
        parts.append(f"r{D}: " + " ".join(f"{c.empirical_acceptance:.4f}" for c in curve))
    criterion(12, "Rosenbrock acceptance grows with partition size", ok,
              "; ".join(parts) + " at 10^2, 10^3, 10^4 boxes")
    assert ok


# -- 13 ------------------------------------------------------------------------

_CLI_RUNS = [
    ["sample", "--target", "g2", "--size", "50", "--n", "200", "--seed", "3"],
    ["sweep", "--target", "g5", "--sizes", "1,10,50", "--max-accepts", "300", "--seed", "4"],
    ["compare", "--target", "levy", "--sizes", "5,20", "--max-accepts", "50"],
    ["mse", "--target", "needle", "--param", "sigma2=0.1", "--sizes", "40", "--n-mrs", "10",
     "--reps", "5", "--seed", "7"],
    ["lmhs", "--target", "needle", "--param", "sigma2=0.006", "--max-burn-in", "500",
     "--replicates", "2"],
    ["partition-dump", "--target", "witch", "--refine-budget", "30"],
]


def test_c13_cli_determinism(tmp_path, criterion):
    differing = []
    for argv in _CLI_RUNS:
        out = tmp_path / f"{argv[0]}.csv"
        runs = []
        for _ in range(2):
            subprocess.run([sys.executable, "-m", "moore_rs", *argv, "--out", str(out)],
                           check=True, capture_output=True)
            runs.append(out.read_bytes())
        if runs[0] != runs[1] or not runs[0]:
            differing.append(argv[0])
    ok = not differing
    criterion(13, "CLI determinism", ok,
              f"{len(_CLI_RUNS)} commands rerun in fresh processes, differing: {differing or 'none'}")
    assert ok
