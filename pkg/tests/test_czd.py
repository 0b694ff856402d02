import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from campanato import (
    DecayFitError,
    DecayProfile,
    Domain,
    GridError,
    GridFunction,
    constructive_bound,
    cz_decompose,
    distribution,
    fit_exponential_decay,
    generate,
    jn_generations,
    make_cube,
)

from oracles import cz_select, jn_oracle


def whole(d):
    return make_cube(d, (0,) * d.n, d.shape)


class TestCZ:
    def test_zero(self):
        d = Domain(1, 1.0, 8)
        cz = cz_decompose(GridFunction(d, np.zeros(8)), whole(d), 1.0)
        assert cz.cubes == [] and cz.good.all()

    def test_single_spike(self):
        d = Domain(1, 1.0, 8)
        g = np.zeros(8)
        g[5] = 4.0
        cz = cz_decompose(GridFunction(d, g), whole(d), 1.0)
        assert [(c.lo, c.hi) for c in cz.cubes] == [((4,), (6,))]
        assert cz.averages.tolist() == [2.0]
        assert cz_select(g, 0, 8, 1.0) == [(4, 2, 2.0)]

    @pytest.mark.parametrize("seed", range(10))
    def test_random_against_oracle(self, seed):
        d = Domain(1, 1.0, 16)
        g = np.random.default_rng(seed).exponential(size=16) ** 2
        tau = 2 * g.mean()
        cz = cz_decompose(GridFunction(d, g), whole(d), tau)
        assert [(c.lo[0], c.extent[0]) for c in cz.cubes] == [(lo, s) for lo, s, _ in cz_select(g, 0, 16, tau)]
        assert np.all((cz.averages > tau) & (cz.averages <= 2 * tau))
        assert np.all(g[cz.good] <= tau)
        assert cz.selected_measure <= g.sum() / 16 / tau + 1e-12

    def test_2d_window(self, rng):
        d = Domain(2, 1.0, 16)
        g = rng.exponential(size=(16, 16)) ** 3
        tau = 1.5 * g.mean()
        cz = cz_decompose(GridFunction(d, g), whole(d), tau)
        assert np.all((cz.averages > tau) & (cz.averages <= 4 * tau * (1 + 1e-12)))
        cover = np.zeros((16, 16), dtype=int)
        for c in cz.cubes:
            cover[c.slices] += 1
        assert cover.max() <= 1
        assert np.all(g[cz.good] <= tau)

    @pytest.mark.parametrize(
        "g,tau",
        [(-np.ones(8), 1.0), (np.full(8, 5.0), 1.0), (np.zeros(8), 0.0)],
    )
    def test_errors(self, g, tau):
        d = Domain(1, 1.0, 8)
        with pytest.raises(GridError):
            cz_decompose(GridFunction(d, g), whole(d), tau)

    def test_non_dyadic_base(self):
        d = Domain(1, 1.0, 12)
        with pytest.raises(GridError):
            cz_decompose(GridFunction(d, np.zeros(12)), whole(d), 1.0)


class TestJN:
    def test_depth_one_is_cz(self, rng):
        d = Domain(1, 1.0, 64)
        f = GridFunction(d, rng.normal(size=64) ** 3)
        jn = jn_generations(f, whole(d), 1.0, math.e, 1)
        drive = jn.deviation()
        cz = cz_decompose(GridFunction(d, drive), whole(d), math.e)
        assert [c.lo for c in jn.generations[0].cubes] == [c.lo for c in cz.cubes]

    @pytest.mark.parametrize("seed", range(4))
    def test_random_signs_against_oracle(self, seed):
        d = Domain(1, 1.0, 32)
        f = generate("random_signs", d, seed=seed)
        jn = jn_generations(f, whole(d), 1.0, 2.0, 3)
        want = jn_oracle(f.values, 1.0, 2.0, 3, jn.scale)
        got = [[(c.lo[0], c.extent[0]) for c in g.cubes] for g in jn.generations]
        assert got == want

    def test_log_singularity_oracle(self):
        d = Domain(1, 1.0, 128)
        f = generate("log_singularity", d)
        jn = jn_generations(f, whole(d), 0.5, 1.5, 4)
        want = jn_oracle(f.values, 0.5, 1.5, 4, jn.scale)
        assert [[(c.lo[0], c.extent[0]) for c in g.cubes] for g in jn.generations] == want

    def test_constant_is_degenerate(self):
        d = Domain(1, 1.0, 16)
        jn = jn_generations(generate("constant", d, c=2.0), whole(d))
        assert jn.degenerate and jn.generations == []

    @pytest.mark.parametrize("kw", [{"p": 1.5}, {"tau": 1.0}, {"depth": 0}])
    def test_errors(self, kw):
        d = Domain(1, 1.0, 16)
        with pytest.raises(GridError):
            jn_generations(generate("gaussian", d), whole(d), **kw)

    def test_scale_is_barred_dyadic(self):
        from campanato import SeminormSpec, enumerate_cubes, seminorm

        d = Domain(1, 1.0, 64)
        f = generate("log_singularity", d)
        jn = jn_generations(f, whole(d))
        want = seminorm(f, SeminormSpec(1.0, 1.0, "barred"), enumerate_cubes(d, "dyadic")).root
        assert jn.scale == pytest.approx(want, rel=1e-14)


@given(st.integers(0, 10_000), st.sampled_from([0.5, 1.0]), st.sampled_from([1.5, 2.0, math.e]))
def test_jn_invariants(seed, p, tau):
    d = Domain(1, 1.0, 64)
    f = GridFunction(d, np.random.default_rng(seed).standard_cauchy(size=64))
    jn = jn_generations(f, whole(d), p, tau, 4)
    chk = jn.check()
    assert chk["window"] and chk["nesting"] and chk["measure"]
    assert chk["off_generation"] in ("tight", "weak")


class TestDistribution:
    def test_zero(self):
        d = Domain(1, 1.0, 8)
        prof = distribution(GridFunction(d, np.zeros(8)), thresholds=[0.1, 1.0])
        assert prof.fractions.tolist() == [0.0, 0.0]

    def test_constant_step(self):
        d = Domain(1, 1.0, 8)
        prof = distribution(GridFunction(d, np.full(8, 2.0)), thresholds=[1.0, 1.999, 2.0, 3.0])
        assert prof.fractions.tolist() == [1.0, 1.0, 0.0, 0.0]

    def test_counting(self, rng):
        d = Domain(1, 1.0, 50)
        x = rng.normal(size=50)
        t = np.linspace(0.1, 2.0, 10)
        prof = distribution(GridFunction(d, x), thresholds=t)
        want = [sum(1 for v in x if abs(v) > ti) / 50 for ti in t]
        assert prof.fractions.tolist() == want

    def test_region(self):
        d = Domain(1, 1.0, 8)
        x = np.array([9.0, 9, 0, 0, 0, 0, 0, 0])
        prof = distribution(GridFunction(d, x), make_cube(d, (0,), (4,)), [1.0])
        assert prof.fractions.tolist() == [0.5]

    def test_bad_thresholds(self):
        d = Domain(1, 1.0, 8)
        with pytest.raises(GridError):
            distribution(GridFunction(d, np.ones(8)), thresholds=[2.0, 1.0])

    def test_csv(self):
        prof = DecayProfile(np.array([1.0, 2.0]), np.array([0.5, 0.25]))
        assert prof.to_csv() == "t,fraction\n1.0,0.5\n2.0,0.25\n"


@given(arrays(float, 40, elements=st.floats(-10, 10)), st.lists(st.floats(0.01, 12), min_size=2, max_size=12, unique=True))
def test_distribution_monotone_and_refinable(x, ts):
    d = Domain(1, 1.0, 40)
    f = GridFunction(d, x)
    t = np.sort(ts)
    prof = distribution(f, thresholds=t)
    assert np.all(np.diff(prof.fractions) <= 0)
    assert np.all((prof.fractions >= 0) & (prof.fractions <= 1))
    finer = np.union1d(t, (t[:-1] + t[1:]) / 2)
    pf = distribution(f, thresholds=finer)
    assert pf.fractions[np.searchsorted(finer, t)].tolist() == prof.fractions.tolist()


class TestFit:
    def test_synthetic(self):
        t = np.linspace(0.5, 5, 20)
        fit = fit_exponential_decay(DecayProfile(t, 0.8 * np.exp(-1.5 * t)))
        assert fit.c1 == pytest.approx(0.8, abs=1e-9)
        assert fit.c2 == pytest.approx(1.5, abs=1e-9)

    def test_constant(self):
        t = np.linspace(0.5, 5, 20)
        fit = fit_exponential_decay(DecayProfile(t, np.full(20, 0.5)))
        assert fit.c2 == pytest.approx(0.0, abs=1e-12) and fit.r2 == 1.0

    def test_only_positive_points(self):
        t = np.linspace(1, 10, 10)
        mu = 0.8 * np.exp(-1.5 * t)
        mu[6:] = 0.0
        fit = fit_exponential_decay(DecayProfile(t, mu))
        assert fit.points == 6 and fit.c2 == pytest.approx(1.5, abs=1e-9)

    def test_range(self):
        t = np.linspace(1, 10, 10)
        fit = fit_exponential_decay(DecayProfile(t, np.exp(-t)), (2.0, 5.0))
        assert (fit.t_lo, fit.t_hi, fit.points) == (2.0, 5.0, 4)

    def test_too_few(self):
        with pytest.raises(DecayFitError):
            fit_exponential_decay(DecayProfile(np.array([1.0, 2.0, 3.0]), np.array([0.5, 0.0, 0.0])))

    def test_log_singularity(self):
        d = Domain(1, 1.0, 512)
        f = generate("log_singularity", d)
        dev = GridFunction(d, np.abs(f.values - np.abs(f.values).mean()))
        fit = fit_exponential_decay(distribution(dev))
        assert fit.c2 > 0 and fit.r2 >= 0.9


@given(st.integers(0, 10_000))
def test_constructive_bound_random(seed):
    d = Domain(1, 1.0, 64)
    f = GridFunction(d, np.random.default_rng(seed).standard_cauchy(size=64))
    jn = jn_generations(f, whole(d))
    dev = GridFunction(d, np.abs(f.values - np.abs(f.values).mean()))
    t = np.geomspace(0.01, 1e3, 40) * jn.scale
    prof = distribution(dev, thresholds=t)
    assert np.all(prof.fractions <= constructive_bound(t, jn.scale, jn.tau, 1, 2.0**3) + 1e-15)


def test_constructive_bound_formula():
    b = constructive_bound([0.0, 4.0 * math.e, 8.0 * math.e], 1.0, math.e, 1)
    np.testing.assert_allclose(b, [1.0, math.exp(-1), math.exp(-2)])
