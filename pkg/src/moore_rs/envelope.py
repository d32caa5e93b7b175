"""Adaptive box partitions carrying range enclosures of a target shape.

The partition defines a simple-function envelope: on each box the envelope
equals the upper endpoint of the target's interval enclosure there.  Boxes
are refined by bisecting the box with the largest priority key along its
widest side.
"""

from __future__ import annotations

import csv
import enum
import heapq
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateMass, OutOfDomain, UnboundedEnclosure
from .interval import Box, Interval, bisect, box_max_diameter, box_volume, diameter, midpoint

__all__ = ["Scheme", "LabeledBox", "Partition", "new_partition", "refine", "envelope_at",
           "acceptance_bounds"]


class Scheme(enum.Enum):
    VOLUME = "volume"
    RANGE = "range"
    INTEGRAL = "integral"

    @classmethod
    def parse(cls, s) -> "Scheme":
        if isinstance(s, Scheme):
            return s
        try:
            return cls(str(s).lower())
        except ValueError:
            raise ValueError(f"unknown scheme {s!r}; choose volume, range or integral") from None


@dataclass(frozen=True)
class LabeledBox:
    box: Box
    enclosure: Interval
    volume: float

    @property
    def upper_mass(self) -> float:
        return self.volume * max(self.enclosure.hi, 0.0)

    @property
    def lower_mass(self) -> float:
        return self.volume * max(self.enclosure.lo, 0.0)

    def key(self, scheme: Scheme) -> float:
        if scheme is Scheme.VOLUME:
            return self.volume
        if scheme is Scheme.RANGE:
            return diameter(self.enclosure)
        return self.volume * diameter(self.enclosure)


def _splittable(box: Box) -> int | None:
    """Axis to bisect, or None when every side is too thin to split."""
    w, axis = box_max_diameter(box)
    d = box.dims[axis]
    if w > 0:
        m = midpoint(d)
        if d.lo < m < d.hi:
            return axis
    # the widest side may be a single ulp while another side still splits
    for k, d in enumerate(box.dims):
        if d.hi > d.lo and d.lo < midpoint(d) < d.hi:
            return k
    return None


class Partition:
    """A tiling of ``domain`` by labeled boxes, plus a refinement queue.

    A bisected box is replaced in place by its lower half and the upper half
    is appended, so box indices stay stable except for the split box.
    """

    def __init__(self, target, domain: Box, scheme="integral"):
        self.target = target
        self.domain = domain
        self.scheme = Scheme.parse(scheme)
        self.boxes: list[LabeledBox] = []
        self._heap: list[tuple[float, int, int]] = []
        self._seq = 0
        self._arrays = None
        self._add(domain)

    def __len__(self):
        return len(self.boxes)

    def __repr__(self):
        return f"Partition({len(self)} boxes, scheme={self.scheme.value})"

    def _label(self, box: Box) -> LabeledBox:
        enc = self.target.eval_interval(box)
        if not math.isfinite(enc.hi):
            raise UnboundedEnclosure(f"enclosure {enc} on box {box} has no finite upper bound")
        return LabeledBox(box, enc, box_volume(box))

    def _push(self, idx: int):
        lb = self.boxes[idx]
        if _splittable(lb.box) is not None:
            # ties pop the older entry first, via the increasing sequence number
            heapq.heappush(self._heap, (-lb.key(self.scheme), self._seq, idx))
            self._seq += 1

    def _add(self, box: Box, at: int | None = None):
        lb = self._label(box)
        if at is None:
            self.boxes.append(lb)
            at = len(self.boxes) - 1
        else:
            self.boxes[at] = lb
        self._push(at)

    def refine(self, steps: int = 1) -> "Partition":
        """Bisect the highest-priority box ``steps`` times (fewer if nothing splits)."""
        for _ in range(int(steps)):
            if not self._heap:
                break
            _, _, idx = heapq.heappop(self._heap)
            box = self.boxes[idx].box
            left, right = bisect(box, _splittable(box))
            self._add(left, at=idx)
            self._add(right)
        self._arrays = None
        return self

    def refine_to(self, size: int) -> "Partition":
        return self.refine(max(0, int(size) - len(self)))

    def peek(self) -> int | None:
        """Index of the box the next refinement step would split."""
        return self._heap[0][2] if self._heap else None

    @property
    def upper_sum(self) -> float:
        """Envelope mass: sum over boxes of volume times enclosure upper bound."""
        return math.fsum(b.upper_mass for b in self.boxes)

    @property
    def lower_sum(self) -> float:
        return math.fsum(b.lower_mass for b in self.boxes)

    def arrays(self):
        """(lo, hi, upper) numpy arrays over boxes; cached until the next refinement."""
        if self._arrays is None:
            lo = np.array([b.box.lo for b in self.boxes], dtype=float)
            hi = np.array([b.box.hi for b in self.boxes], dtype=float)
            up = np.array([b.enclosure.hi for b in self.boxes], dtype=float)
            self._arrays = (lo, hi, up)
        return self._arrays

    def box_weights(self) -> np.ndarray:
        """Unnormalized proposal weights v * max(upper, 0) per box."""
        return np.array([b.upper_mass for b in self.boxes], dtype=float)

    def owner(self, x: Sequence[float]) -> int:
        """Lowest-index box containing x (closed boxes)."""
        lo, hi, _ = self.arrays()
        x = np.asarray(x, dtype=float)
        if x.shape != (self.domain.n,):
            raise ValueError(f"point must have {self.domain.n} coordinates")
        inside = np.all((lo <= x) & (x <= hi), axis=1)
        hits = np.flatnonzero(inside)
        if hits.size == 0:
            raise OutOfDomain(f"point {tuple(x)} lies outside the domain {self.domain}")
        return int(hits[0])

    def envelope_at(self, x: Sequence[float]) -> float:
        return float(self.arrays()[2][self.owner(x)])

    def envelope_values(self, X, chunk: int = 2048) -> np.ndarray:
        """Vectorized envelope_at over the rows of X, same tie rule."""
        lo, hi, up = self.arrays()
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], chunk):
            x = X[s:s + chunk, None, :]
            inside = np.all((lo[None] <= x) & (x <= hi[None]), axis=2)
            found = inside.any(axis=1)
            if not found.all():
                bad = X[s + int(np.flatnonzero(~found)[0])]
                raise OutOfDomain(f"point {tuple(bad)} lies outside the domain {self.domain}")
            out[s:s + chunk] = up[inside.argmax(axis=1)]
        return out

    def acceptance_bounds(self, mass_estimate: float | None = None) -> Interval:
        """[guaranteed lower bound, upper bound] on the rejection acceptance probability."""
        up = self.upper_sum
        if not up > 0:
            raise DegenerateMass("envelope integral is zero")
        lower = min(self.lower_sum / up, 1.0)
        upper = 1.0 if mass_estimate is None else max(lower, min(1.0, mass_estimate / up))
        return Interval(lower, upper)

    def rows(self):
        """One tuple per box: lo_1..lo_n, hi_1..hi_n, enclosure lo/hi, priority key."""
        for b in self.boxes:
            yield (*b.box.lo, *b.box.hi, b.enclosure.lo, b.enclosure.hi, b.key(self.scheme))

    def header(self) -> list[str]:
        n = self.domain.n
        return ([f"lo_{k + 1}" for k in range(n)] + [f"hi_{k + 1}" for k in range(n)]
                + ["enc_lo", "enc_hi", "key"])

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.header())
        for row in self.rows():
            w.writerow([repr(float(v)) for v in row])


# functional aliases

def new_partition(target, domain: Box, scheme="integral") -> Partition:
    return Partition(target, domain, scheme)


def refine(p: Partition, steps: int) -> Partition:
    return p.refine(steps)


def envelope_at(p: Partition, x) -> float:
    return p.envelope_at(x)


def acceptance_bounds(p: Partition, mass_estimate: float | None = None) -> Interval:
    return p.acceptance_bounds(mass_estimate)
