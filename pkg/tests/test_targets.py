import json
import math

import numpy as np
import pytest

from moore_rs import interval as iv
from moore_rs.errors import DimensionTooLarge, InvalidSpec
from moore_rs.interval import Box
from moore_rs.targets import (NAMED_TARGETS, GaussianMixtureSpec, LevySpec, NeedleSpec,
                              RosenbrockSpec, WitchsHatSpec, build_target, load_target_config,
                              named_spec, quadrature, true_mean_oracle)

# reference values frozen from converged Gauss-Legendre runs (mesh doubled until stable)
G2_MEAN = 36.25
LEVY40_MASS = 177.6532118555378  # 1600 panels per axis; 800 agrees to 1e-10


def test_table_one_parameters():
    g1 = named_spec("g1")
    assert g1.components == ((1.0, (-5.0,), (1.0,)),)
    assert g1.domain == Box.cube(-100, 100, 1)
    g2 = named_spec("g2")
    assert [c[0] for c in g2.components] == [0.25, 0.75]
    for name in ("g1", "g2", "g5", "g5p", "g5pp", "g5hat"):
        assert math.isclose(sum(c[0] for c in named_spec(name).components), 1.0)
    assert named_spec("g5hat").domain == Box.cube(-1e100, 1e100, 1)
    assert named_spec("g5pp").components[4][2] == (0.001,)


def _levy_direct(x1, x2, T):
    s1 = sum(i * np.cos((i - 1) * x1 + i) for i in range(1, 6))
    s2 = sum(j * np.cos((j + 1) * x2 + j) for j in range(1, 6))
    return np.exp(-(s1 * s2 + (x1 + 1.42513) ** 2 + (x2 + 0.80032) ** 2) / T)


def test_levy_matches_direct_formula():
    f = build_target(LevySpec(40.0))
    for x in [(-1.3068, -1.4248), (-1.3, -1.42), (0.0, 0.0), (57.3, -88.1)]:
        assert f.eval_point(x) == pytest.approx(_levy_direct(*x, 40.0), rel=1e-12)


def test_levy_is_positive_everywhere():
    spec = LevySpec(40.0)
    assert build_target(spec).eval_interval(spec.domain).lo > 0


def test_rosenbrock_at_ones():
    for D in (2, 3, 5):
        assert build_target(RosenbrockSpec(D)).eval_point((1.0,) * D) == 1.0


def test_needle_value_at_modes():
    spec = NeedleSpec(sigma2=0.01)
    f = build_target(spec)
    assert f.eval_point((1.0, 1.0, 1.0)) == pytest.approx(1e6 + math.exp(-1.5), rel=1e-12)
    assert f.eval_point((0.0, 0.0, 0.0)) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("make", [
    lambda: GaussianMixtureSpec([(1.0, (0.0,), (0.0,))], Box.cube(-1, 1, 1)),
    lambda: GaussianMixtureSpec([(-1.0, (0.0,), (1.0,))], Box.cube(-1, 1, 1)),
    lambda: GaussianMixtureSpec([(1.0, (0.0, 0.0), (1.0,))], Box.cube(-1, 1, 2)),
    lambda: GaussianMixtureSpec([], Box.cube(-1, 1, 1)),
    lambda: LevySpec(0.0),
    lambda: LevySpec(math.inf),
    lambda: LevySpec(40.0, Box.cube(-1, 1, 3)),
    lambda: NeedleSpec(sigma2=-1.0),
    lambda: RosenbrockSpec(1),
    lambda: WitchsHatSpec(2, mixing=1.5),
    lambda: WitchsHatSpec(2, center=(0.0,)),
    lambda: GaussianMixtureSpec([(1.0, (0.0,), (1.0,))], Box([(0.0, math.inf)])),
])
def test_invalid_specs(make):
    with pytest.raises(InvalidSpec):
        make()


@pytest.mark.parametrize("name", sorted(NAMED_TARGETS))
def test_full_domain_enclosure_is_finite(name):
    spec = named_spec(name)
    enc = build_target(spec).eval_interval(spec.domain)
    assert math.isfinite(enc.hi)


def test_witch_height():
    assert WitchsHatSpec(2).height == pytest.approx(3 / math.pi, rel=1e-15)
    spec = WitchsHatSpec(3, radius_exponent=1)
    assert spec.height == pytest.approx(math.gamma(1.5) * 12 / (2 * math.pi ** 1.5 * 1e-3))


def test_witch_normalization():
    spec = WitchsHatSpec(2)
    mass, mean = quadrature(build_target(spec), spec.domain, spec.breakpoints, 200, 8)
    assert mass == pytest.approx(1.0, abs=1e-6)
    assert mean == pytest.approx(spec.analytic_mean(), abs=1e-5)


def test_witch_enclosure_cases():
    spec = WitchsHatSpec(2)
    f = build_target(spec)
    rng = np.random.default_rng(3)
    for _ in range(300):
        lo = rng.uniform(-10, 9, 2)
        w = rng.exponential(1.0, 2)
        box = Box([(a, min(a + d, 10.0)) for a, d in zip(lo, w)])
        enc = f.eval_interval(box)
        pts = np.array(box.lo) + rng.random((50, 2)) * (np.array(box.hi) - np.array(box.lo))
        vals = f.eval_points(pts)
        assert np.all(vals >= enc.lo) and np.all(vals <= enc.hi)
    # inside, outside and straddling boxes
    assert f.eval_interval(Box([(1.9, 2.1), (1.9, 2.1)])).lo > f.brim
    assert f.eval_interval(Box([(5, 6), (5, 6)])) == iv.Interval(f.brim)
    enc = f.eval_interval(Box([(2.5, 3.5), (1.5, 2.5)]))
    assert enc.lo <= f.brim < enc.hi


def test_true_mean_oracle_one_dimensional():
    assert true_mean_oracle(named_spec("g1"))[0] == pytest.approx(-5.0, abs=1e-9)
    assert true_mean_oracle(named_spec("g2"))[0] == pytest.approx(G2_MEAN, abs=1e-9)
    assert named_spec("g2").analytic_mean()[0] == G2_MEAN


def test_true_mean_oracle_needle():
    mean = true_mean_oracle(NeedleSpec(sigma2=0.006), n_grid=16, order=6)
    assert mean == pytest.approx((0.5, 0.5, 0.5), abs=1e-6)


def test_levy_mass_reference():
    spec = LevySpec(40.0)
    mass, _ = quadrature(build_target(spec), spec.domain, None, 800, 8)
    assert mass == pytest.approx(LEVY40_MASS, rel=1e-9)


def test_oracle_dimension_limit():
    with pytest.raises(DimensionTooLarge):
        true_mean_oracle(RosenbrockSpec(4))


def test_named_spec_parameters():
    assert named_spec("levy", T=10).temperature == 10
    assert named_spec("needle", sigma2=1e-10).sigma2 == 1e-10
    assert named_spec("rosenbrock", D=3).domain == Box.cube(-10, 10, 3)
    w = named_spec("witch", D=3, r=1, m=0.2)
    assert (w.dimension, w.radius_exponent, w.mixing, w.center) == (3, 1, 0.2, (2.0, 2.0, 2.0))
    assert named_spec("g1", domain="[-10,10]").domain == Box.cube(-10, 10, 1)
    with pytest.raises(InvalidSpec):
        named_spec("nope")
    with pytest.raises(InvalidSpec):
        named_spec("g1", T=3)
    with pytest.raises(InvalidSpec):
        named_spec("levy", bogus=1)


def test_load_config(tmp_path):
    spec = load_target_config({"name": "levy", "params": {"T": 20}, "domain": "[-50,50]^2"})
    assert spec.temperature == 20 and spec.domain == Box.cube(-50, 50, 2)
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"formula": "exp(-x1^2)", "domain": "[-5,5]"}))
    spec = load_target_config(str(path))
    assert build_target(spec).eval_point((0.0,)) == 1.0
    with pytest.raises(InvalidSpec):
        load_target_config({"formula": "x1"})
    with pytest.raises(InvalidSpec):
        load_target_config({"params": {}})
