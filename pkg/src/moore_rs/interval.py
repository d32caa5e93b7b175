"""Outward-rounded interval arithmetic over machine floats, and boxes.

Every operation returns an interval that contains the exact real result
of applying the operation to any reals drawn from the operands.  The
basic arithmetic operations (+, -, *, /, sqrt) are rounded *exactly* in
the outward direction: the error of the round-to-nearest result is
recovered with an error-free transformation (TwoSum / Dekker product),
and the endpoint is stepped one ulp outward only when the result was
inexact on the wrong side.  Library transcendentals (exp, sin, ...) are
not correctly rounded, so their endpoints are stepped two ulps outward
unless the value is a known exact case such as exp(0) = 1.

Overflow saturates to +/-inf in the outward direction only; lower
endpoints never become +inf and upper endpoints never become -inf.
"""

from __future__ import annotations

import math
import re
import sys
from contextlib import contextmanager
from typing import Iterable, Sequence

from .errors import DivisionByZeroInterval, DomainError, ParseError

__all__ = [
    "Interval", "Box", "add", "sub", "mul", "div", "neg", "pow_int",
    "std_fn", "STANDARD_FUNCTIONS", "diameter", "radius", "midpoint",
    "mignitude", "magnitude", "hull", "hausdorff", "subset",
    "box_volume", "box_max_diameter", "bisect", "box_midpoint", "contains",
    "outward_rounding", "format_interval", "parse_interval", "parse_box",
    "format_box", "PI", "HALF_PI",
]

_INF = math.inf
_MAX = sys.float_info.max
_SPLITTER = 134217729.0  # 2**27 + 1, Veltkamp split constant
# Dekker's product is exact only away from overflow and underflow.
_SAFE_BIG = 2.0 ** 480
_SAFE_SMALL = 2.0 ** -480

_outward = True


@contextmanager
def outward_rounding(enabled: bool):
    """Temporarily enable or disable outward rounding.

    Disabling trades rigor for speed; enclosures computed inside the block
    are no longer guaranteed.
    """
    global _outward
    saved = _outward
    _outward = bool(enabled)
    try:
        yield
    finally:
        _outward = saved


def _dn(x):
    return math.nextafter(x, -_INF)


def _up(x):
    return math.nextafter(x, _INF)


def _finite(x):
    return -_INF < x < _INF


# ---------------------------------------------------------------------------
# directed-rounding scalar kernels

def _add_rd(a, b):
    s = a + b
    if not _outward:
        return s
    if _finite(s):
        t = s - a
        e = (a - (s - t)) + (b - t)
        return s if e >= 0 else _dn(s)  # nan error term also steps
    if s == _INF and _finite(a) and _finite(b):
        return _MAX
    return s


def _add_ru(a, b):
    s = a + b
    if not _outward:
        return s
    if _finite(s):
        t = s - a
        e = (a - (s - t)) + (b - t)
        return s if e <= 0 else _up(s)
    if s == -_INF and _finite(a) and _finite(b):
        return -_MAX
    return s


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _prod_err(a, b, p):
    """Exact a*b - p for p = fl(a*b), valid in the safe exponent range."""
    ah, al = _split(a)
    bh, bl = _split(b)
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _safe(x):
    x = abs(x)
    return _SAFE_SMALL < x < _SAFE_BIG


def _mul_rd(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    p = a * b
    if not _outward:
        return p
    if _finite(p):
        if _safe(a) and _safe(b):
            return p if _prod_err(a, b, p) >= 0 else _dn(p)
        return _dn(p)
    if p == _INF and _finite(a) and _finite(b):
        return _MAX
    return p


def _mul_ru(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    p = a * b
    if not _outward:
        return p
    if _finite(p):
        if _safe(a) and _safe(b):
            return p if _prod_err(a, b, p) <= 0 else _up(p)
        return _up(p)
    if p == -_INF and _finite(a) and _finite(b):
        return -_MAX
    return p


def _div_dir(a, b):
    """Return (q, s) where q = fl(a/b) and s is the sign of a/b - q."""
    q = a / b
    if not _finite(q) or not _finite(a) or not _finite(b) or q == 0.0:
        # infinities and zero quotients: caller handles by stepping
        return q, None
    if not (_safe(q) and _safe(b) and _safe(a)):
        return q, None
    P = q * b
    E = _prod_err(q, b, P)
    r = (a - P) - E
    if r == 0.0:
        return q, 0
    return q, (1 if (r > 0) == (b > 0) else -1)


def _div_rd(a, b):
    if a == 0.0:
        return 0.0
    if not _finite(b):
        if not _finite(a):
            return -_INF
        return -0.0 if (a > 0) == (b > 0) else _dn(0.0)
    q, s = _div_dir(a, b)
    if not _outward:
        return q
    if s is None:
        if q == _INF:
            return _MAX if _finite(a) else _INF
        return _dn(q)
    return q if s >= 0 else _dn(q)


def _div_ru(a, b):
    if a == 0.0:
        return 0.0
    if not _finite(b):
        if not _finite(a):
            return _INF
        return 0.0 if (a > 0) != (b > 0) else _up(0.0)
    q, s = _div_dir(a, b)
    if not _outward:
        return q
    if s is None:
        if q == -_INF:
            return -_MAX if _finite(a) else -_INF
        return _up(q)
    return q if s <= 0 else _up(q)


def _sqrt_rd(x):
    s = math.sqrt(x)
    if not _outward or s == 0.0 or not _finite(s):
        return s
    if _safe(s):
        P = s * s
        r = (x - P) - _prod_err(s, s, P)
        return s if r >= 0 else _dn(s)
    return _dn(s)


def _sqrt_ru(x):
    s = math.sqrt(x)
    if not _outward or s == 0.0 or not _finite(s):
        return s
    if _safe(s):
        P = s * s
        r = (x - P) - _prod_err(s, s, P)
        return s if r <= 0 else _up(s)
    return _up(s)


def _tdn(v):
    """Two ulps down, for library (not correctly rounded) functions."""
    if not _outward:
        return v
    return _dn(_dn(v))


def _tup(v):
    if not _outward:
        return v
    return _up(_up(v))


# ---------------------------------------------------------------------------
# the Interval type

class Interval:
    """Closed interval [lo, hi] of machine floats with lo <= hi.

    Instances are immutable by convention; all operations return new
    intervals.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if not lo <= hi:
            raise ValueError(f"invalid interval [{lo!r}, {hi!r}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def _make(cls, lo, hi):
        iv = object.__new__(cls)
        iv.lo = lo
        iv.hi = hi
        return iv

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __str__(self):
        return format_interval(self)

    def __eq__(self, other):
        if isinstance(other, Interval):
            return self.lo == other.lo and self.hi == other.hi
        return NotImplemented

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __contains__(self, x):
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def __iter__(self):
        yield self.lo
        yield self.hi

    def is_thin(self):
        return self.lo == self.hi

    def is_bounded(self):
        return _finite(self.lo) and _finite(self.hi)

    def __add__(self, other):
        return add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers of intervals are supported")
        return pow_int(self, n)

    @property
    def diameter(self):
        return diameter(self)

    @property
    def midpoint(self):
        return midpoint(self)


def _coerce(x):
    if isinstance(x, Interval):
        return x
    x = float(x)
    return Interval._make(x, x)


_make = Interval._make
PI = _make(3.141592653589793, 3.1415926535897936)
HALF_PI = _make(1.5707963267948966, 1.5707963267948968)


# ---------------------------------------------------------------------------
# arithmetic

def add(a: Interval, b: Interval) -> Interval:
    return _make(_add_rd(a.lo, b.lo), _add_ru(a.hi, b.hi))


def sub(a: Interval, b: Interval) -> Interval:
    return _make(_add_rd(a.lo, -b.hi), _add_ru(a.hi, -b.lo))


def neg(a: Interval) -> Interval:
    return _make(-a.hi, -a.lo)


def _prod(a, b):
    # 0 * inf is taken as 0, the usual interval convention
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def mul(a: Interval, b: Interval) -> Interval:
    al, ah, bl, bh = a.lo, a.hi, b.lo, b.hi
    pairs = ((al, bl), (al, bh), (ah, bl), (ah, bh))
    prods = [_prod(x, y) for x, y in pairs]
    pmin = min(prods)
    pmax = max(prods)
    # several pairs may share the float extreme but differ in true value
    lo = min(_mul_rd(*pairs[i]) for i in range(4) if prods[i] == pmin)
    hi = max(_mul_ru(*pairs[i]) for i in range(4) if prods[i] == pmax)
    return _make(lo, hi)


def div(a: Interval, b: Interval) -> Interval:
    if b.lo <= 0.0 <= b.hi:
        raise DivisionByZeroInterval(f"division by {format_interval(b)}, which contains 0")
    al, ah, bl, bh = a.lo, a.hi, b.lo, b.hi
    pairs = ((al, bl), (al, bh), (ah, bl), (ah, bh))
    quots = [x / y if _finite(y) or _finite(x) else math.copysign(_INF, x * y)
             for x, y in pairs]
    qmin = min(quots)
    qmax = max(quots)
    lo = min(_div_rd(*pairs[i]) for i in range(4) if quots[i] == qmin)
    hi = max(_div_ru(*pairs[i]) for i in range(4) if quots[i] == qmax)
    return _make(lo, hi)


def _pow_thin(x: float, n: int) -> Interval:
    """Enclosure of x**n for a float x and n >= 1, by repeated squaring."""
    result = None
    base = _make(x, x)
    while n:
        if n & 1:
            result = base if result is None else mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


def pow_int(a: Interval, n: int) -> Interval:
    """Integer power with the odd / even / zero / negative case split."""
    n = int(n)
    if n == 0:
        return _make(1.0, 1.0)
    if n < 0:
        if a.lo <= 0.0 <= a.hi:
            raise DivisionByZeroInterval(
                f"negative power {n} of {format_interval(a)}, which contains 0")
        p = pow_int(a, -n)
        if p.lo <= 0.0 <= p.hi:
            # underflow: the true power is nonzero and its sign is known
            if a.lo > 0.0 or n % 2 == 0:
                p = _make(5e-324, max(p.hi, 5e-324))
            else:
                p = _make(min(p.lo, -5e-324), -5e-324)
        return div(_make(1.0, 1.0), p)
    if n == 1:
        return a
    if n % 2:
        return _make(_pow_thin(a.lo, n).lo, _pow_thin(a.hi, n).hi)
    mig, mag = mignitude(a), magnitude(a)
    return _make(_pow_thin(mig, n).lo if mig else 0.0, _pow_thin(mag, n).hi)


# ---------------------------------------------------------------------------
# standard functions

def _lib(f, x, overflow):
    try:
        return f(x)
    except OverflowError:
        return overflow


def _exp(a):
    lo = 1.0 if a.lo == 0.0 else max(_tdn(_lib(math.exp, a.lo, _MAX)), 0.0)
    hi = 1.0 if a.hi == 0.0 else _tup(_lib(math.exp, a.hi, _INF))
    return _make(lo, hi)


def _log(a):
    if not a.lo > 0.0:
        raise DomainError("log", format_interval(a))
    lo = 0.0 if a.lo == 1.0 else _tdn(math.log(a.lo))
    hi = 0.0 if a.hi == 1.0 else _tup(math.log(a.hi))
    return _make(lo, hi)


def _sqrt(a):
    if not a.lo >= 0.0:
        raise DomainError("sqrt", format_interval(a))
    return _make(_sqrt_rd(a.lo), _sqrt_ru(a.hi))


def _abs(a):
    return _make(mignitude(a), magnitude(a))


def _monotone_inc(name, f, lo_clip=-_INF, hi_clip=_INF, zero_fixed=True):
    def ext(a):
        if zero_fixed and a.lo == 0.0:
            lo = 0.0
        else:
            lo = max(_tdn(_lib(f, a.lo, _INF if a.lo > 0 else -_INF)), lo_clip)
            if lo == _INF:
                lo = _MAX
        if zero_fixed and a.hi == 0.0:
            hi = 0.0
        else:
            hi = min(_tup(_lib(f, a.hi, _INF if a.hi > 0 else -_INF)), hi_clip)
            if hi == -_INF:
                hi = -_MAX
        return _make(lo, hi)
    ext.__name__ = f"_{name}"
    return ext


_sinh = _monotone_inc("sinh", math.sinh)
_tanh = _monotone_inc("tanh", math.tanh, -1.0, 1.0)
_atan = _monotone_inc("atan", math.atan, -HALF_PI.hi, HALF_PI.hi)
_asin_raw = _monotone_inc("asin", math.asin, -HALF_PI.hi, HALF_PI.hi)


def _asin(a):
    if a.lo < -1.0 or a.hi > 1.0:
        raise DomainError("asin", format_interval(a))
    return _asin_raw(a)


def _acos(a):
    if a.lo < -1.0 or a.hi > 1.0:
        raise DomainError("acos", format_interval(a))
    lo = 0.0 if a.hi == 1.0 else max(_tdn(math.acos(a.hi)), 0.0)
    hi = min(_tup(math.acos(a.lo)), PI.hi)
    return _make(lo, hi)


def _cosh(a):
    mig, mag = mignitude(a), magnitude(a)
    lo = 1.0 if mig == 0.0 else max(_tdn(_lib(math.cosh, mig, _MAX)), 1.0)
    hi = 1.0 if mag == 0.0 else _tup(_lib(math.cosh, mag, _INF))
    return _make(lo, hi)


# Critical points of sin / cos / tan are the multiples j*pi/2.  A point is
# treated as contained whenever its rigorous enclosure meets [lo, hi], so
# uncertainty always widens the result.
_TRIG_LIMIT = 2.0 ** 50


def _hits(lo, hi, residue):
    """True if some j = residue (mod 4) may have j*pi/2 in [lo, hi]."""
    jlo = math.floor(lo / HALF_PI.hi) - 1
    jhi = math.ceil(hi / HALF_PI.lo) + 1
    j = jlo + ((residue - jlo) % 4)
    while j <= jhi:
        c = mul(_make(float(j), float(j)), HALF_PI)
        if c.hi >= lo and c.lo <= hi:
            return True
        j += 4
    return False


def _hits_odd(lo, hi):
    return _hits(lo, hi, 1) or _hits(lo, hi, 3)


def _periodic(f, a, max_res, min_res):
    lo, hi = a.lo, a.hi
    if not (_finite(lo) and _finite(hi)) or hi - lo >= 2 * PI.hi \
            or max(abs(lo), abs(hi)) > _TRIG_LIMIT:
        return _make(-1.0, 1.0)
    # f(0) is exact for sin and cos, so a zero endpoint is not widened
    ends = [(f(x), x == 0.0) for x in (lo, hi)]
    if _hits(lo, hi, max_res):
        top = 1.0
    else:
        top = min(max(v if exact else _tup(v) for v, exact in ends), 1.0)
    if _hits(lo, hi, min_res):
        bottom = -1.0
    else:
        bottom = max(min(v if exact else _tdn(v) for v, exact in ends), -1.0)
    return _make(bottom, top)


def _sin(a):
    if a.lo == a.hi == 0.0:
        return _make(0.0, 0.0)
    return _periodic(math.sin, a, 1, 3)


def _cos(a):
    if a.lo == a.hi == 0.0:
        return _make(1.0, 1.0)
    return _periodic(math.cos, a, 0, 2)


def _tan(a):
    lo, hi = a.lo, a.hi
    if not (_finite(lo) and _finite(hi)) or hi - lo >= PI.lo \
            or max(abs(lo), abs(hi)) > _TRIG_LIMIT or _hits_odd(lo, hi):
        raise DomainError("tan", format_interval(a))
    return _make(0.0 if lo == 0.0 else _tdn(math.tan(lo)),
                 0.0 if hi == 0.0 else _tup(math.tan(hi)))


STANDARD_FUNCTIONS = {
    "exp": _exp, "log": _log, "sqrt": _sqrt, "abs": _abs,
    "sin": _sin, "cos": _cos, "tan": _tan,
    "sinh": _sinh, "cosh": _cosh, "tanh": _tanh,
    "asin": _asin, "acos": _acos, "atan": _atan,
}


def std_fn(name: str, a: Interval) -> Interval:
    """Interval extension of a standard function; raises DomainError."""
    try:
        fn = STANDARD_FUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown standard function {name!r}") from None
    return fn(a)


# ---------------------------------------------------------------------------
# measures

def diameter(a: Interval) -> float:
    """Width hi - lo, rounded up."""
    return _add_ru(a.hi, -a.lo)


def radius(a: Interval) -> float:
    return diameter(a) / 2.0


def midpoint(a: Interval) -> float:
    lo, hi = a.lo, a.hi
    if not (_finite(lo) and _finite(hi)):
        raise ValueError(f"midpoint of unbounded interval {format_interval(a)}")
    m = (lo + hi) / 2.0
    if not _finite(m):
        m = lo / 2.0 + hi / 2.0
    return min(max(m, lo), hi)


def mignitude(a: Interval) -> float:
    if a.lo <= 0.0 <= a.hi:
        return 0.0
    return min(abs(a.lo), abs(a.hi))


def magnitude(a: Interval) -> float:
    return max(abs(a.lo), abs(a.hi))


def hull(a: Interval, b: Interval) -> Interval:
    return _make(min(a.lo, b.lo), max(a.hi, b.hi))


def hausdorff(a: Interval, b: Interval) -> float:
    return max(abs(a.lo - b.lo), abs(a.hi - b.hi))


def subset(a: Interval, b: Interval) -> bool:
    return b.lo <= a.lo and a.hi <= b.hi


# ---------------------------------------------------------------------------
# boxes

class Box:
    """Axis-aligned box: an ordered, non-empty tuple of Intervals."""

    __slots__ = ("dims",)

    def __init__(self, dims: Iterable):
        dims = tuple(d if isinstance(d, Interval) else Interval(*d) for d in dims)
        if not dims:
            raise ValueError("a box needs at least one dimension")
        self.dims = dims

    def __len__(self):
        return len(self.dims)

    def __getitem__(self, k):
        return self.dims[k]

    def __iter__(self):
        return iter(self.dims)

    def __eq__(self, other):
        return isinstance(other, Box) and self.dims == other.dims

    def __hash__(self):
        return hash(self.dims)

    def __repr__(self):
        return f"Box({format_box(self)})"

    @property
    def n(self):
        return len(self.dims)

    @property
    def lo(self):
        return tuple(d.lo for d in self.dims)

    @property
    def hi(self):
        return tuple(d.hi for d in self.dims)

    @property
    def volume(self):
        return box_volume(self)

    @classmethod
    def cube(cls, lo, hi, n):
        return cls([Interval(lo, hi)] * n)

    def is_subset(self, other: "Box") -> bool:
        return all(subset(a, b) for a, b in zip(self.dims, other.dims))


def box_volume(b: Box) -> float:
    v = 1.0
    for d in b.dims:
        v *= diameter(d)
    return v


def box_max_diameter(b: Box) -> tuple[float, int]:
    """(widest side's diameter, its axis); ties go to the lowest axis."""
    best, axis = -1.0, 0
    for k, d in enumerate(b.dims):
        w = diameter(d)
        if w > best:
            best, axis = w, k
    return best, axis


def bisect(b: Box, axis: int) -> tuple[Box, Box]:
    d = b.dims[axis]
    m = midpoint(d)
    left = list(b.dims)
    right = list(b.dims)
    left[axis] = _make(d.lo, m)
    right[axis] = _make(m, d.hi)
    return Box(left), Box(right)


def box_midpoint(b: Box) -> tuple[float, ...]:
    return tuple(midpoint(d) for d in b.dims)


def contains(b: Box, point: Sequence[float]) -> bool:
    if len(point) != len(b.dims):
        raise ValueError(f"point has {len(point)} coordinates, box has {len(b.dims)}")
    return all(d.lo <= x <= d.hi for d, x in zip(b.dims, point))


# ---------------------------------------------------------------------------
# text round-trip

def format_interval(a: Interval) -> str:
    # repr gives the shortest string that parses back to the same float
    return f"[{a.lo!r},{a.hi!r}]"


def format_box(b: Box) -> str:
    return "x".join(format_interval(d) for d in b.dims)


_NUM = r"\s*([-+]?(?:inf|infinity|(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?))\s*"
_IV_RE = re.compile(r"\[" + _NUM + "," + _NUM + r"\]", re.IGNORECASE)
_POW_RE = re.compile(r"\s*\^\s*(\d+)")


def parse_interval(text: str) -> Interval:
    m = _IV_RE.fullmatch(text.strip())
    if not m:
        raise ParseError(f"cannot parse interval {text!r}")
    return Interval(float(m.group(1)), float(m.group(2)))


def parse_box(text: str) -> Box:
    """Parse '[lo,hi]x[lo,hi]', '[lo,hi],[lo,hi]' or the power form '[lo,hi]^D'."""
    text = text.strip()
    dims: list[Interval] = []
    pos = 0
    while pos < len(text):
        m = _IV_RE.match(text, pos)
        if not m:
            raise ParseError(f"cannot parse domain {text!r}", pos)
        iv = Interval(float(m.group(1)), float(m.group(2)))
        pos = m.end()
        p = _POW_RE.match(text, pos)
        reps = 1
        if p:
            reps = int(p.group(1))
            if reps < 1:
                raise ParseError(f"domain power must be >= 1 in {text!r}", pos)
            pos = p.end()
        dims.extend([iv] * reps)
        while pos < len(text) and text[pos] in " \t,x×*":
            pos += 1
    if not dims:
        raise ParseError(f"empty domain {text!r}")
    return Box(dims)
