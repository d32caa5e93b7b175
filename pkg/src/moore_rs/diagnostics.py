"""Experiment protocols: acceptance sweeps, the B/W chain statistic and the MSE trio."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Sequence

import numpy as np

from .envelope import Partition, Scheme
from .errors import InsufficientChains
from .sampler import LMHSChain, TrioSampler, make_rng

__all__ = ["AcceptanceCurvePoint", "BWReport", "MSEReport", "LMHSReport", "splitmix64",
           "acceptance_sweep", "bw_statistic", "mse_protocol", "replicate_estimates",
           "lmhs_bw_experiment"]

_MASK = (1 << 64) - 1


def splitmix64(seed: int, k: int) -> int:
    """Seed of replicate k derived from a master seed (SplitMix64 output)."""
    z = (int(seed) + (k + 1) * 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


# ---------------------------------------------------------------------------
# acceptance curves

@dataclass(frozen=True)
class AcceptanceCurvePoint:
    partition_size: int
    guaranteed_lower_bound: float
    empirical_acceptance: float
    n_trials: int
    n_accepted: int
    cpu_seconds: float

    @property
    def standard_error(self) -> float:
        a = self.empirical_acceptance
        return float(np.sqrt(max(a * (1 - a), 0.0) / self.n_trials)) if self.n_trials else float("nan")

    @staticmethod
    def header() -> list[str]:
        return [f.name for f in fields(AcceptanceCurvePoint)]


def acceptance_sweep(target, domain, scheme, sizes: Sequence[int], max_accepts: int = 10_000,
                     max_trials: int = 100_000, seed: int = 0,
                     partition: Partition | None = None) -> list[AcceptanceCurvePoint]:
    """Acceptance at each partition size, refining one partition incrementally.

    Sampling at each size stops when either cap is reached.  Size k uses
    the stream seeded by ``splitmix64(seed, k)``.
    """
    sizes = [int(s) for s in sizes]
    if any(b < a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be ascending")
    if partition is None:
        partition = Partition(target, domain, Scheme.parse(scheme))
    out = []
    for k, size in enumerate(sizes):
        t0 = time.process_time()
        partition.refine_to(size)
        bound = partition.acceptance_bounds().lo
        batch = TrioSampler(target, partition, splitmix64(seed, k)).draw_until(max_accepts, max_trials)
        out.append(AcceptanceCurvePoint(len(partition), bound, batch.acceptance, len(batch),
                                        batch.n_accepted, time.process_time() - t0))
    return out


# ---------------------------------------------------------------------------
# between / within chain variation

@dataclass(frozen=True)
class BWReport:
    B: np.ndarray
    W: np.ndarray
    ratio: np.ndarray

    def converged(self, threshold: float = 0.05) -> bool:
        return bool(np.all(self.ratio <= threshold))


def bw_statistic(chains, scale_by_length: bool = False) -> BWReport:
    """Per-coordinate between-chain (B) and within-chain (W) variation.

    B is the population variance of the chain means and W the mean of the
    population within-chain variances.  With ``scale_by_length`` B is
    multiplied by the chain length, the classic R-hat convention.
    """
    try:
        arr = np.asarray(chains, dtype=float)
    except ValueError:
        raise InsufficientChains("chains must have equal lengths") from None
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[0] < 2 or arr.shape[1] < 2:
        raise InsufficientChains("need at least 2 chains of length >= 2")
    means = arr.mean(axis=1)
    B = means.var(axis=0)
    if scale_by_length:
        B = B * arr.shape[1]
    W = arr.var(axis=1).mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(W > 0, B / np.where(W > 0, W, 1.0), np.where(B > 0, np.inf, 0.0))
    return BWReport(B, W, ratio)


@dataclass
class LMHSReport:
    burn_in: int | None
    run_length: int
    post_means: np.ndarray  # (chains, dims) mean after burn-in
    final_ratio: np.ndarray
    acceptance_rate: float
    chains: np.ndarray | None = field(default=None, repr=False)


def lmhs_bw_experiment(target, domain, cube_side: float, seed: int, n_chains: int = 4,
                       starts=None, check_every: int = 50, threshold: float = 0.05,
                       max_burn_in: int = 50_000, post_factor: int = 100,
                       keep_chains: bool = False) -> LMHSReport:
    """Run LMHS chains until B/W <= threshold on every coordinate, then 100x longer.

    B/W is computed on the whole history so far at every ``check_every``
    steps.  Starts default to uniform draws over the domain.
    """
    rng = make_rng(seed)
    lo, hi = np.array(domain.lo), np.array(domain.hi)
    if starts is None:
        starts = lo + rng.random((n_chains, domain.n)) * (hi - lo)
    runners = [LMHSChain(target, s, cube_side, splitmix64(seed, c), domain)
               for c, s in enumerate(starts)]
    hist = [[r.run(check_every)] for r in runners]
    t, burn = check_every, None
    while True:
        arr = np.stack([np.concatenate(h) for h in hist])
        if bw_statistic(arr).converged(threshold):
            burn = t
            break
        if t >= max_burn_in:
            break
        for r, h in zip(runners, hist):
            h.append(r.run(check_every))
        t += check_every
    extra = post_factor * t if burn is not None else 0
    for r, h in zip(runners, hist):
        if extra:
            h.append(r.run(extra))
    arr = np.stack([np.concatenate(h) for h in hist])
    post = arr[:, t:] if extra else arr
    total_steps = arr.shape[1] * len(runners)
    return LMHSReport(burn, arr.shape[1], post.mean(axis=1), bw_statistic(arr).ratio,
                      sum(r.n_accepted for r in runners) / total_steps,
                      arr if keep_chains else None)


# ---------------------------------------------------------------------------
# MSE of the rejection / importance / independent-MH trio

def _trio_estimates(target, partition, n_mrs, seed, max_trials=None):
    b = TrioSampler(target, partition, seed).draw_until(n_mrs, max_trials)
    acc = np.flatnonzero(b.mrs)
    if acc.size == 0:
        nan = np.full(b.points.shape[1], np.nan)
        return nan, nan, nan, len(b), 0
    mrs = b.points[acc].mean(axis=0)
    w = b.weight
    is_ = (w[:, None] * b.points).sum(axis=0) / w.sum()
    # the chain before the first rejection-sampler acceptance is burn-in
    states = b.imhs_state[acc[0]:]
    imhs = b.points[states].mean(axis=0)
    return mrs, is_, imhs, len(b), acc.size


def _rep_worker(args):
    target, partition, n_mrs, seed, max_trials = args
    return _trio_estimates(target, partition, n_mrs, seed, max_trials)


@dataclass
class MSEReport:
    mse_mrs: float
    mse_is: float
    mse_imhs: float
    estimates: dict  # sampler name -> (n_reps, dims) array of mean estimates
    sq_errors: dict  # sampler name -> (n_reps,) squared errors
    n_trials: np.ndarray
    n_accepted: np.ndarray

    @property
    def acceptance(self) -> float:
        return float(self.n_accepted.sum() / self.n_trials.sum())

    def standard_errors(self) -> dict:
        return {k: float(v.std(ddof=1) / np.sqrt(v.size)) for k, v in self.sq_errors.items()}


def replicate_estimates(target, partition: Partition, n_mrs: int, n_reps: int, seed: int,
                        workers: int = 1, max_trials: int | None = None):
    """Per-replicate (mrs, is, imhs, trials, accepted) tuples, rep r seeded by splitmix64."""
    jobs = [(target, partition, n_mrs, splitmix64(seed, r), max_trials) for r in range(n_reps)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_rep_worker, jobs, chunksize=max(1, n_reps // (4 * workers))))
    return [_rep_worker(j) for j in jobs]


def mse_protocol(target, partition: Partition, true_mean, n_mrs: int = 100, n_reps: int = 500,
                 seed: int = 0, workers: int = 1, max_trials: int | None = None) -> MSEReport:
    """MSE of the three mean estimators over ``n_reps`` replicates.

    Each replicate draws proposals until ``n_mrs`` are MRS-accepted.  MRS
    averages the accepted points; IS is the self-normalized weighted mean of
    all proposals; IMHS averages the chain states from the first MRS
    acceptance onward.
    """
    mu = np.asarray(true_mean, dtype=float)
    reps = replicate_estimates(target, partition, n_mrs, n_reps, seed, workers, max_trials)
    est = {name: np.array([r[i] for r in reps]) for i, name in enumerate(("mrs", "is", "imhs"))}
    sq = {k: ((v - mu) ** 2).sum(axis=1) for k, v in est.items()}
    return MSEReport(float(sq["mrs"].mean()), float(sq["is"].mean()), float(sq["imhs"].mean()),
                     est, sq, np.array([r[3] for r in reps]), np.array([r[4] for r in reps]))
