"""Rejection sampling from a partition envelope, with coupled IS and IMHS marks.

Every proposal consumes exactly ``n + 3`` uniforms from the generator, in
this order: alias column, alias coin, one per coordinate, height.  The height
uniform drives both the rejection test and the independent Metropolis test,
so batching never changes the stream and MRS-accepted proposals are always
IMHS-accepted too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .envelope import Partition
from .errors import DegenerateMass, OutOfDomain

__all__ = ["AliasTable", "build_alias", "make_rng", "SampleRecord", "SampleBatch", "TrioSampler",
           "draw_trio", "propose", "LMHSChain", "lmhs_run"]


def make_rng(seed: int) -> np.random.Generator:
    """Mersenne Twister stream for a 64-bit seed."""
    return np.random.Generator(np.random.MT19937(int(seed) & 0xFFFFFFFFFFFFFFFF))


class AliasTable:
    """Walker alias table (Vose's construction) over unnormalized weights."""

    def __init__(self, weights: Sequence[float]):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("alias table needs a non-empty 1-D weight vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("alias weights must be finite and nonnegative")
        total = math.fsum(w.tolist())
        if not total > 0:
            raise DegenerateMass("all alias weights are zero")
        K = w.size
        self.probabilities = w / total
        scaled = self.probabilities * K
        prob = np.ones(K)
        alias = np.arange(K)
        small = [i for i in range(K) if scaled[i] < 1.0]
        large = [i for i in range(K) if scaled[i] >= 1.0]
        while small and large:
            s, l = small.pop(), large.pop()
            prob[s] = scaled[s]
            alias[s] = l
            scaled[l] = (scaled[l] + scaled[s]) - 1.0
            (small if scaled[l] < 1.0 else large).append(l)
        # leftovers are 1 up to rounding
        for i in small + large:
            prob[i] = 1.0
        self.prob = prob
        self.alias = alias

    def __len__(self):
        return self.prob.size

    def implied_probabilities(self) -> np.ndarray:
        """Probability of each index under the table, for reconstruction checks."""
        K = len(self)
        out = self.prob.copy()
        np.add.at(out, self.alias, 1.0 - self.prob)
        return out / K

    def draw(self, u_column, u_coin):
        """Vectorized draw from two uniform arrays."""
        K = len(self)
        i = np.minimum((np.asarray(u_column) * K).astype(np.int64), K - 1)
        return np.where(np.asarray(u_coin) < self.prob[i], i, self.alias[i])


def build_alias(p: Partition) -> AliasTable:
    return AliasTable(p.box_weights())


class SampleRecord(NamedTuple):
    point: tuple
    proposed_height: float
    target_value: float
    envelope_value: float
    importance_weight: float
    mrs_accepted: bool
    imhs_accepted: bool


@dataclass
class SampleBatch:
    """Column arrays for a run of consecutive proposals.

    ``imhs_state[i]`` is the index of the IMHS chain state after proposal i;
    it is -1 when the chain started before this batch and has not moved.
    """
    points: np.ndarray
    box: np.ndarray
    height: np.ndarray
    target: np.ndarray
    envelope: np.ndarray
    weight: np.ndarray
    mrs: np.ndarray
    imhs: np.ndarray
    imhs_state: np.ndarray
    envelope_violations: int = 0

    def __len__(self):
        return self.box.size

    @property
    def n_accepted(self) -> int:
        return int(self.mrs.sum())

    @property
    def acceptance(self) -> float:
        return self.n_accepted / len(self) if len(self) else float("nan")

    def records(self) -> Iterator[SampleRecord]:
        for i in range(len(self)):
            yield SampleRecord(tuple(self.points[i].tolist()), float(self.height[i]),
                               float(self.target[i]), float(self.envelope[i]),
                               float(self.weight[i]), bool(self.mrs[i]), bool(self.imhs[i]))

    @classmethod
    def concat(cls, parts: list["SampleBatch"]) -> "SampleBatch":
        offsets = np.cumsum([0] + [len(p) for p in parts[:-1]])
        states = []
        last = -1
        for off, p in zip(offsets, parts):
            s = np.where(p.imhs_state >= 0, p.imhs_state + off, last)
            if s.size:
                last = s[-1]
            states.append(s)
        cat = lambda name: np.concatenate([getattr(p, name) for p in parts])
        return cls(cat("points"), cat("box"), cat("height"), cat("target"), cat("envelope"),
                   cat("weight"), cat("mrs"), cat("imhs"), np.concatenate(states),
                   sum(p.envelope_violations for p in parts))

    def head(self, m: int) -> "SampleBatch":
        # violations are counted per batch, so a prefix keeps the total as an upper bound
        return SampleBatch(self.points[:m], self.box[:m], self.height[:m], self.target[:m],
                           self.envelope[:m], self.weight[:m], self.mrs[:m], self.imhs[:m],
                           self.imhs_state[:m], self.envelope_violations)


class TrioSampler:
    """Streams proposals from a frozen partition, marking MRS and IMHS acceptance."""

    def __init__(self, target, partition: Partition, seed: int):
        self.target = target
        self.n = partition.domain.n
        lo, hi, up = partition.arrays()
        self.lo, self.width, self.upper = lo, hi - lo, np.maximum(up, 0.0)
        # half-open ownership: points stay below a box's upper face unless it is the domain's
        dom_hi = np.array(partition.domain.hi)
        self.cap = np.where(hi >= dom_hi, hi, np.nextafter(hi, -np.inf))
        self.table = build_alias(partition)
        self.rng = make_rng(seed)
        self._pending = np.empty((0, self.n + 3))
        self._imhs_w = None  # importance weight of the current IMHS state

    def _uniforms(self, m: int) -> np.ndarray:
        take = self._pending[:m]
        self._pending = self._pending[m:]
        if take.shape[0] < m:
            take = np.vstack([take, self.rng.random((m - take.shape[0], self.n + 3))])
        return take

    def _unread(self, U: np.ndarray):
        self._pending = np.vstack([U, self._pending])

    def propose(self, m: int, U: np.ndarray | None = None):
        """(points, box indices, height uniforms) for the next m proposals."""
        if U is None:
            U = self._uniforms(m)
        box = self.table.draw(U[:, 0], U[:, 1])
        pts = self.lo[box] + U[:, 2:2 + self.n] * self.width[box]
        pts = np.minimum(pts, self.cap[box])
        return pts, box, U[:, -1]

    def draw(self, m: int) -> SampleBatch:
        return self._batch(self._uniforms(m))

    def _batch(self, U: np.ndarray) -> SampleBatch:
        pts, box, u_h = self.propose(U.shape[0], U)
        f = self.target.eval_points(pts)
        env = self.upper[box]
        height = u_h * env
        mrs = height <= f
        weight = np.where(env > 0, np.maximum(f, 0.0) / np.where(env > 0, env, 1.0), 0.0)
        violations = int(np.count_nonzero(f > env))
        imhs = np.zeros(box.size, dtype=bool)
        state = np.empty(box.size, dtype=np.int64)
        cur_w, cur = self._imhs_w, -1
        for i, (u, w) in enumerate(zip(u_h.tolist(), weight.tolist())):
            # accept iff u <= w / cur_w, written without dividing
            if cur_w is None or u * cur_w <= w:
                imhs[i] = True
                cur_w, cur = w, i
            state[i] = cur
        self._imhs_w = cur_w
        return SampleBatch(pts, box, height, f, env, weight, mrs, imhs, state, violations)

    def draw_until(self, n_accepted: int, max_trials: int | None = None,
                   chunk: int = 4096) -> SampleBatch:
        """Proposals up to and including the n-th MRS acceptance, or until max_trials.

        Uniforms drawn past the stopping point are kept for the next call.
        """
        parts, got, used = [], 0, 0
        while got < n_accepted and (max_trials is None or used < max_trials):
            m = chunk if max_trials is None else min(chunk, max_trials - used)
            U = self._uniforms(m)
            saved_w = self._imhs_w
            b = self._batch(U)
            acc = np.flatnonzero(b.mrs)
            if got + acc.size >= n_accepted:
                stop = int(acc[n_accepted - got - 1]) + 1
                if stop < m:
                    # replay the prefix so the IMHS state matches the stopping point
                    self._imhs_w = saved_w
                    b = self._batch(U[:stop])
                    self._unread(U[stop:])
                got = n_accepted
            else:
                got += acc.size
            used += len(b)
            parts.append(b)
            # grow chunks when acceptance is low
            rate = max(got, 1) / used
            chunk = int(min(1 << 18, max(chunk, 1.2 * (n_accepted - got) / rate)))
        if not parts:
            return self._batch(np.empty((0, self.n + 3)))
        return SampleBatch.concat(parts)


def propose(table: AliasTable, partition: Partition, rng: np.random.Generator, m: int = 1):
    """Points and box indices from the partition proposal using ``rng``."""
    lo, hi, _ = partition.arrays()
    U = rng.random((m, partition.domain.n + 2))
    box = table.draw(U[:, 0], U[:, 1])
    pts = lo[box] + U[:, 2:] * (hi - lo)[box]
    return np.minimum(pts, np.nextafter(hi[box], -np.inf)), box


def draw_trio(target, p: Partition, n_proposals: int, seed: int) -> SampleBatch:
    return TrioSampler(target, p, seed).draw(n_proposals)


class LMHSChain:
    """Resumable random-walk Metropolis chain with a uniform cube proposal.

    Proposals outside ``domain`` are rejected.  Per step the generator
    yields n offset uniforms then the acceptance uniform.
    """

    def __init__(self, target, start: Sequence[float], cube_side: float, seed: int, domain=None):
        self.x = [float(v) for v in start]
        n = len(self.x)
        if domain is not None:
            self.lo, self.hi = list(domain.lo), list(domain.hi)
            if not all(a <= v <= b for a, v, b in zip(self.lo, self.x, self.hi)):
                raise OutOfDomain(f"start {tuple(self.x)} lies outside {domain}")
        else:
            self.lo, self.hi = [-math.inf] * n, [math.inf] * n
        self.f = target.eval_point
        self.fx = self.f(self.x)
        self.cube_side = float(cube_side)
        self.rng = make_rng(seed)
        self.n_accepted = 0

    def run(self, n_steps: int, chunk: int = 8192) -> np.ndarray:
        """The next ``n_steps`` states as an (n_steps, n) array."""
        n = len(self.x)
        out = np.empty((n_steps, n))
        x, fx, f, lo, hi = self.x, self.fx, self.f, self.lo, self.hi
        for s0 in range(0, n_steps, chunk):
            m = min(chunk, n_steps - s0)
            U = self.rng.random((m, n + 1))
            steps = ((U[:, :n] - 0.5) * self.cube_side).tolist()
            us = U[:, n].tolist()
            rows = []
            for j in range(m):
                y = [a + d for a, d in zip(x, steps[j])]
                if all(a <= v <= b for a, v, b in zip(lo, y, hi)):
                    fy = f(y)
                    # accept iff u <= f(y)/f(x); a zero-density state always moves
                    if us[j] * fx <= fy:
                        x, fx = y, fy
                        self.n_accepted += 1
                rows.append(x)
            out[s0:s0 + m] = rows
        self.x, self.fx = x, fx
        return out


def lmhs_run(target, start: Sequence[float], cube_side: float, n_steps: int, seed: int,
             domain=None) -> np.ndarray:
    """LMHS chain of ``n_steps + 1`` rows, the first being ``start``."""
    chain = LMHSChain(target, start, cube_side, seed, domain)
    return np.vstack([np.asarray(chain.x, dtype=float)[None, :], chain.run(n_steps)])
