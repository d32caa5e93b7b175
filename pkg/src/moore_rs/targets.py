"""Built-in target shapes: Gaussian mixtures, Levy, needle, Rosenbrock, witch's hat.

Each spec dataclass validates its parameters and builds an evaluator with
``eval_point``, ``eval_points`` and ``eval_interval``.  All but the witch's
hat are plain formulas parsed into an ExprDag.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import interval as iv
from .errors import DimensionTooLarge, InvalidSpec
from .exprdag import ExprDag, parse
from .interval import Box, Interval, parse_box

__all__ = [
    "GaussianMixtureSpec", "LevySpec", "NeedleSpec", "RosenbrockSpec", "WitchsHatSpec",
    "FormulaSpec", "WitchsHat", "build_target", "named_spec", "NAMED_TARGETS",
    "true_mean_oracle", "quadrature", "load_target_config", "DEMO_FORMULA",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _num(x: float) -> str:
    return repr(float(x))


def _shift(var: str, mu: float) -> str:
    """Text for (var - mu) without a double minus."""
    if mu == 0:
        return var
    return f"{var} - {_num(mu)}" if mu > 0 else f"{var} + {_num(-mu)}"


def _as_box(domain) -> Box:
    if isinstance(domain, Box):
        return domain
    if isinstance(domain, str):
        return parse_box(domain)
    return Box(domain)


def _check_domain(box: Box, n: int | None = None):
    if n is not None and box.n != n:
        raise InvalidSpec(f"domain has {box.n} dimensions, expected {n}")
    for d in box.dims:
        if not (math.isfinite(d.lo) and math.isfinite(d.hi)) or not d.lo < d.hi:
            raise InvalidSpec(f"domain side {d} must be finite with lo < hi")


# ---------------------------------------------------------------------------
# specs

@dataclass(frozen=True)
class GaussianMixtureSpec:
    """Mixture of axis-aligned Gaussian densities, truncated to ``domain``.

    ``components`` holds (weight, mean vector, stdev vector) triples.
    """
    components: tuple
    domain: Box

    def __post_init__(self):
        comps = tuple((float(w), tuple(map(float, np.atleast_1d(mu))),
                       tuple(map(float, np.atleast_1d(s)))) for w, mu, s in self.components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "domain", _as_box(self.domain))
        if not comps:
            raise InvalidSpec("mixture needs at least one component")
        _check_domain(self.domain)
        for w, mu, s in comps:
            if w < 0:
                raise InvalidSpec(f"negative mixture weight {w}")
            if len(mu) != self.domain.n or len(s) != self.domain.n:
                raise InvalidSpec("mean and stdev vectors must match the domain dimension")
            if min(s) <= 0:
                raise InvalidSpec(f"standard deviations must be positive, got {s}")

    @property
    def dimension(self):
        return self.domain.n

    def formula(self) -> str:
        n = self.dimension
        terms = []
        for w, mu, s in self.components:
            coef = w / (math.prod(s) * _SQRT_2PI ** n)
            quad = " + ".join(f"(({_shift(f'x{k + 1}', mu[k])})/{_num(s[k])})^2"
                              for k in range(n))
            terms.append(f"{_num(coef)}*exp(-0.5*({quad}))")
        return " + ".join(terms)

    def build(self) -> ExprDag:
        return parse(self.formula(), self.dimension)

    def breakpoints(self, axis: int) -> list[float]:
        pts = []
        for _, mu, s in self.components:
            pts.extend(mu[axis] + k * s[axis] for k in _FEATURE_STEPS)
        return pts

    def analytic_mean(self) -> tuple[float, ...]:
        """Mean of the untruncated mixture (weights normalized)."""
        total = sum(w for w, _, _ in self.components)
        return tuple(sum(w * mu[k] for w, mu, _ in self.components) / total
                     for k in range(self.dimension))


_FEATURE_STEPS = (-12, -8, -6, -4, -3, -2, -1, -0.5, 0, 0.5, 1, 2, 3, 4, 6, 8, 12)


@dataclass(frozen=True)
class LevySpec:
    temperature: float = 40.0
    domain: Box = field(default_factory=lambda: Box.cube(-100, 100, 2))

    def __post_init__(self):
        object.__setattr__(self, "domain", _as_box(self.domain))
        if not (math.isfinite(self.temperature) and self.temperature > 0):
            raise InvalidSpec(f"temperature must be finite and positive, got {self.temperature}")
        _check_domain(self.domain, 2)

    @property
    def dimension(self):
        return 2

    def energy_formula(self) -> str:
        s1 = " + ".join(f"{i}*cos({i - 1}*x1 + {i})" for i in range(1, 6))
        s2 = " + ".join(f"{j}*cos({j + 1}*x2 + {j})" for j in range(1, 6))
        return f"({s1})*({s2}) + (x1 + 1.42513)^2 + (x2 + 0.80032)^2"

    def formula(self) -> str:
        return f"exp(-({self.energy_formula()})/{_num(self.temperature)})"

    def build(self) -> ExprDag:
        return parse(self.formula(), 2)

    def breakpoints(self, axis):
        return []


@dataclass(frozen=True)
class NeedleSpec:
    """Two isotropic trivariate Gaussian bumps of equal mass: haystack and needle."""
    mu1: tuple = (0.0, 0.0, 0.0)
    mu2: tuple = (1.0, 1.0, 1.0)
    sigma1: float = 1.0
    sigma2: float = 0.006
    domain: Box = field(default_factory=lambda: Box.cube(-10, 10, 3))

    def __post_init__(self):
        object.__setattr__(self, "mu1", tuple(map(float, self.mu1)))
        object.__setattr__(self, "mu2", tuple(map(float, self.mu2)))
        object.__setattr__(self, "domain", _as_box(self.domain))
        if len(self.mu1) != 3 or len(self.mu2) != 3:
            raise InvalidSpec("needle means must be 3-vectors")
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise InvalidSpec("needle standard deviations must be positive")
        _check_domain(self.domain, 3)

    @property
    def dimension(self):
        return 3

    def formula(self) -> str:
        parts = []
        for mu, s in ((self.mu1, self.sigma1), (self.mu2, self.sigma2)):
            quad = " + ".join(f"(({_shift(f'x{k + 1}', mu[k])})/{_num(s)})^2" for k in range(3))
            parts.append(f"{_num(s ** -3)}*exp(-0.5*({quad}))")
        return " + ".join(parts)

    def build(self) -> ExprDag:
        return parse(self.formula(), 3)

    def breakpoints(self, axis):
        return ([self.mu1[axis] + k * self.sigma1 for k in _FEATURE_STEPS]
                + [self.mu2[axis] + k * self.sigma2 for k in _FEATURE_STEPS])

    def analytic_mean(self):
        return tuple((a + b) / 2 for a, b in zip(self.mu1, self.mu2))


@dataclass(frozen=True)
class RosenbrockSpec:
    dimension: int = 2
    domain: Box | None = None

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 2:
            raise InvalidSpec(f"Rosenbrock dimension must be an integer >= 2, got {self.dimension}")
        object.__setattr__(self, "dimension", int(self.dimension))
        dom = Box.cube(-10, 10, self.dimension) if self.domain is None else _as_box(self.domain)
        object.__setattr__(self, "domain", dom)
        _check_domain(self.domain, self.dimension)

    def formula(self) -> str:
        terms = [f"100*(x{i} - x{i - 1}^2)^2 + (1 - x{i - 1})^2"
                 for i in range(2, self.dimension + 1)]
        return f"exp(-({' + '.join(terms)}))"

    def build(self) -> ExprDag:
        return parse(self.formula(), self.dimension)

    def breakpoints(self, axis):
        return [-2.0, -1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0]


@dataclass(frozen=True)
class WitchsHatSpec:
    """Cone of radius R = 10**-r on a uniform brim, mixed with weight m."""
    dimension: int = 2
    center: tuple | None = None
    radius_exponent: float = 0.0
    mixing: float = 0.05
    domain: Box | None = None

    def __post_init__(self):
        D = int(self.dimension)
        if D != self.dimension or D < 1:
            raise InvalidSpec(f"witch's hat dimension must be a positive integer, got {self.dimension}")
        object.__setattr__(self, "dimension", D)
        center = (2.0,) * D if self.center is None else tuple(map(float, self.center))
        if len(center) != D:
            raise InvalidSpec("center must have one coordinate per dimension")
        object.__setattr__(self, "center", center)
        dom = Box.cube(-10, 10, D) if self.domain is None else _as_box(self.domain)
        object.__setattr__(self, "domain", dom)
        _check_domain(self.domain, D)
        if not 0.0 <= self.mixing <= 1.0:
            raise InvalidSpec(f"mixing weight must lie in [0, 1], got {self.mixing}")

    @property
    def radius(self):
        return 10.0 ** (-self.radius_exponent)

    @property
    def height(self):
        D, R = self.dimension, self.radius
        return math.gamma(D / 2) * D * (D + 1) / (2 * math.pi ** (D / 2) * R ** D)

    @property
    def brim_volume(self):
        return math.prod(d.hi - d.lo for d in self.domain.dims)

    def build(self) -> "WitchsHat":
        return WitchsHat(self)

    def breakpoints(self, axis):
        c, R = self.center[axis], self.radius
        return [c + k * R for k in (-1, -0.75, -0.5, -0.25, 0, 0.25, 0.5, 0.75, 1)]

    def analytic_mean(self):
        return tuple(self.mixing * c + (1 - self.mixing) * (d.lo + d.hi) / 2
                     for c, d in zip(self.center, self.domain.dims))


@dataclass(frozen=True)
class FormulaSpec:
    """A user formula over a box."""
    formula_text: str
    domain: Box

    def __post_init__(self):
        object.__setattr__(self, "domain", _as_box(self.domain))
        _check_domain(self.domain)

    @property
    def dimension(self):
        return self.domain.n

    def formula(self):
        return self.formula_text

    def build(self) -> ExprDag:
        return parse(self.formula_text, self.dimension)

    def breakpoints(self, axis):
        return []


# ---------------------------------------------------------------------------
# witch's hat evaluator

class WitchsHat:
    """Evaluator for the witch's hat, whose indicator is not an elementary function.

    The interval extension works by cases on the enclosure N of ||X - C||:
    N inside the cone radius uses the cone-plus-brim formula, N outside uses
    the brim alone, and a straddling N takes the hull of both branches.
    """

    def __init__(self, spec: WitchsHatSpec):
        self.spec = spec
        self.arity = spec.dimension
        self.radius = spec.radius
        self.cone = spec.mixing * spec.height
        self.brim = (1.0 - spec.mixing) / spec.brim_volume
        quad = " + ".join(f"({_shift(f'x{k + 1}', c)})^2" for k, c in enumerate(spec.center))
        self.norm = parse(f"sqrt({quad})", self.arity)
        self.source = f"witch(D={self.arity}, r={spec.radius_exponent}, m={spec.mixing})"

    def __repr__(self):
        return f"WitchsHat({self.source})"

    def eval_point(self, x) -> float:
        d = self.norm.eval_point(x)
        if d <= self.radius:
            return self.cone * (1.0 - d / self.radius) + self.brim
        return self.brim

    def eval_points(self, X) -> np.ndarray:
        d = self.norm.eval_points(X)
        return np.where(d <= self.radius, self.cone * (1.0 - d / self.radius) + self.brim, self.brim)

    def _cone_part(self, N: Interval) -> Interval:
        R = Interval(self.radius)
        return iv.add(iv.mul(Interval(self.cone), iv.sub(Interval(1.0), iv.div(N, R))),
                      Interval(self.brim))

    def eval_interval(self, box: Box) -> Interval:
        N = self.norm.eval_interval(box)
        brim = Interval(self.brim)
        if N.hi <= self.radius:
            return self._cone_part(N)
        if N.lo > self.radius:
            return brim
        return iv.hull(self._cone_part(Interval(N.lo, self.radius)), brim)


# ---------------------------------------------------------------------------
# registry

DEMO_FORMULA = "-(" + " + ".join(f"{k}*x1*sin({k}*(x1 - 3)/3)" for k in range(1, 6)) + ")"

_G5_MU = (-15.0, -5.0, 3.0, 6.0, 50.0)
_G5_W = (0.15, 0.2, 0.05, 0.1, 0.5)


def _mixture_1d(mus, sigmas, weights, half_width=100.0):
    comps = [(w, (m,), (s,)) for m, s, w in zip(mus, sigmas, weights)]
    return GaussianMixtureSpec(comps, Box.cube(-half_width, half_width, 1))


NAMED_TARGETS = {
    "g1": lambda: _mixture_1d([-5.0], [1.0], [1.0]),
    "g2": lambda: _mixture_1d([-5.0, 50.0], [1.0, 0.25], [0.25, 0.75]),
    "g5": lambda: _mixture_1d(_G5_MU, (1.0, 1.0, 0.5, 1.0, 0.1), _G5_W),
    "g5p": lambda: _mixture_1d(_G5_MU, (0.1, 0.1, 0.05, 0.1, 0.01), _G5_W),
    "g5pp": lambda: _mixture_1d(_G5_MU, (0.01, 0.01, 0.005, 0.01, 0.001), _G5_W),
    "g5hat": lambda: _mixture_1d(_G5_MU, (1.0, 1.0, 0.5, 1.0, 0.1), _G5_W, 1e100),
    "levy": LevySpec,
    "needle": NeedleSpec,
    "rosenbrock": RosenbrockSpec,
    "witch": WitchsHatSpec,
    "demo": lambda: FormulaSpec(DEMO_FORMULA, Box.cube(-10, 6, 1)),
}

# short parameter names accepted on the command line
_PARAM_ALIASES = {
    "levy": {"T": "temperature"},
    "needle": {"s1": "sigma1", "s2": "sigma2", "sigma": "sigma2"},
    "rosenbrock": {"D": "dimension"},
    "witch": {"D": "dimension", "r": "radius_exponent", "m": "mixing", "C": "center"},
}


def named_spec(name: str, domain=None, **params):
    """Spec for a built-in target, with optional parameter and domain overrides."""
    try:
        factory = NAMED_TARGETS[name]
    except KeyError:
        raise InvalidSpec(f"unknown target {name!r}; choose from {sorted(NAMED_TARGETS)}") from None
    aliases = _PARAM_ALIASES.get(name, {})
    params = {aliases.get(k, k): v for k, v in params.items()}
    if name in ("levy", "needle", "rosenbrock", "witch"):
        if domain is not None:
            params["domain"] = _as_box(domain)
        if "dimension" in params:
            params["dimension"] = int(params["dimension"])
        try:
            return factory(**params)
        except TypeError as exc:
            raise InvalidSpec(f"bad parameters for {name}: {exc}") from None
    if params:
        raise InvalidSpec(f"target {name!r} takes no parameters, got {sorted(params)}")
    spec = factory()
    if domain is not None:
        if isinstance(spec, FormulaSpec):
            spec = FormulaSpec(spec.formula_text, _as_box(domain))
        else:
            spec = GaussianMixtureSpec(spec.components, _as_box(domain))
    return spec


def build_target(spec):
    """Evaluator (ExprDag or WitchsHat) for any spec in this module."""
    try:
        return spec.build()
    except AttributeError:
        raise InvalidSpec(f"not a target spec: {spec!r}") from None


def load_target_config(config):
    """Spec from a dict or JSON file with either 'name' or 'formula', plus 'domain'.

    Example: ``{"name": "levy", "params": {"T": 40}, "domain": "[-100,100]^2"}``.
    """
    if not isinstance(config, dict):
        with open(config) as fh:
            config = json.load(fh)
    domain = config.get("domain")
    if "formula" in config:
        if domain is None:
            raise InvalidSpec("a formula target needs a domain")
        return FormulaSpec(config["formula"], _as_box(domain))
    if "name" not in config:
        raise InvalidSpec("target config needs 'name' or 'formula'")
    return named_spec(config["name"], domain=domain, **config.get("params", {}))


# ---------------------------------------------------------------------------
# quadrature oracle

def _axis_nodes(lo, hi, breakpoints, n_panels, order):
    """Composite Gauss-Legendre nodes and weights on [lo, hi]."""
    edges = set(np.linspace(lo, hi, n_panels + 1).tolist())
    edges.update(b for b in breakpoints if lo < b < hi)
    edges = np.array(sorted(edges))
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (a + b) / 2 + (b - a) / 2 * x
    weights = (b - a) / 2 * w
    return nodes.ravel(), weights.ravel()


def quadrature(target, domain: Box, breakpoints=None, n_grid: int = 64, order: int = 8,
               chunk: int = 1 << 20):
    """Tensor-grid integral of the shape and of x * shape over ``domain``.

    Returns (mass, mean).  Deterministic; intended as a test oracle for
    dimension <= 3.
    """
    n = domain.n
    if n > 3:
        raise DimensionTooLarge(f"grid quadrature supports dimension <= 3, got {n}")
    axes = [_axis_nodes(d.lo, d.hi, breakpoints(k) if breakpoints else [], n_grid, order)
            for k, d in enumerate(domain.dims)]
    sizes = [len(a[0]) for a in axes]
    total = math.prod(sizes)
    mass = 0.0
    moment = np.zeros(n)
    for start in range(0, total, chunk):
        idx = np.unravel_index(np.arange(start, min(start + chunk, total)), sizes)
        pts = np.column_stack([axes[k][0][idx[k]] for k in range(n)])
        wts = np.prod([axes[k][1][idx[k]] for k in range(n)], axis=0)
        f = np.maximum(target.eval_points(pts), 0.0) * wts
        mass += f.sum()
        moment += f @ pts
    return mass, tuple(moment / mass)


def true_mean_oracle(spec, n_grid: int | None = None, order: int = 8):
    """Mean of the normalized target by deterministic tensor-grid quadrature."""
    if spec.dimension > 3:
        raise DimensionTooLarge(f"grid quadrature supports dimension <= 3, got {spec.dimension}")
    if n_grid is None:
        n_grid = {1: 400, 2: 400, 3: 24}[spec.dimension]
    _, mean = quadrature(build_target(spec), spec.domain, spec.breakpoints, n_grid, order)
    return mean
