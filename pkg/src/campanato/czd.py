"""Calderón–Zygmund stopping-time selection, iterated John–Nirenberg
generations, distribution functions and exponential tail fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Cube, CubeFamily, GridError, GridFunction, enumerate_cubes, iter_windows, make_cube
from .seminorms import SeminormSpec, seminorm

DEFAULT_TAU = math.e


class DecayFitError(ValueError):
    """Too few positive profile points to fit an exponential."""


def _dyadic_side(cube: Cube) -> int:
    ext = set(cube.extent)
    if len(ext) != 1:
        raise GridError("base cube must have equal extents")
    size = ext.pop()
    if size & (size - 1):
        raise GridError(f"base cube side {size} cells is not a power of two")
    return size


def _select(values: np.ndarray, active: np.ndarray, lo: tuple, size: int, tau: float):
    """Maximal dyadic subcubes of ``[lo, lo + size)`` whose average exceeds ``tau``.

    ``values`` and ``active`` are full-domain arrays. Returns a list of
    ``(lo, size, average)`` sorted by ``lo``.
    """
    n = values.ndim
    picked = []
    stack = [(tuple(lo), size)]
    while stack:
        clo, csize = stack.pop()
        half = csize // 2
        for corner in np.ndindex(*(2,) * n):
            klo = tuple(a + c * half for a, c in zip(clo, corner))
            sl = tuple(slice(a, a + half) for a in klo)
            cnt = int(active[sl].sum())
            if cnt == 0:
                continue
            avg = float(values[sl][active[sl]].sum() / cnt)
            if avg > tau:
                picked.append((klo, half, avg))
            elif half > 1:
                stack.append((klo, half))
    picked.sort(key=lambda t: t[0])
    return picked


@dataclass
class CZDecomposition:
    base: Cube
    tau: float
    cubes: list
    averages: np.ndarray
    good: np.ndarray

    @property
    def selected_measure(self) -> float:
        return float(sum(c.measure for c in self.cubes))


def cz_decompose(g: GridFunction, base: Cube, tau: float) -> CZDecomposition:
    """Dyadic stopping-time selection of ``g >= 0`` inside ``base`` at level ``tau``.

    A child cube is selected the first time its average exceeds ``tau``;
    recursion stops at single cells. ``good`` marks the cells of ``base``
    outside every selected cube.
    """
    size = _dyadic_side(base)
    act = g.domain.active
    region = g.values[base.slices][act[base.slices]]
    if region.size == 0:
        raise GridError("base cube misses the active domain")
    if np.any(region < 0):
        raise GridError("driving function must be nonnegative")
    if not tau > 0:
        raise GridError("tau must be positive")
    avg0 = region.mean()
    if avg0 > tau:
        raise GridError(f"average over the base cube {avg0:g} already exceeds tau={tau:g}")
    picked = _select(g.values, act, base.lo, size, tau)
    cubes = [make_cube(g.domain, lo, tuple(a + s for a in lo)) for lo, s, _ in picked]
    good = act[base.slices].copy()
    for c in cubes:
        good[tuple(slice(a - b, e - b) for a, e, b in zip(c.lo, c.hi, base.lo))] = False
    return CZDecomposition(base, float(tau), cubes, np.array([a for *_, a in picked]), good)


@dataclass
class Generation:
    cubes: list
    averages: np.ndarray
    references: np.ndarray
    parents: np.ndarray

    @property
    def measure(self) -> float:
        return float(sum(c.measure for c in self.cubes))


@dataclass
class JNGenerations:
    base: Cube
    p: float
    tau: float
    depth: int
    scale: float
    normalized: np.ndarray
    active: np.ndarray
    generations: list = field(default_factory=list)

    @property
    def degenerate(self) -> bool:
        return self.scale == 0.0

    def covered(self, i: int) -> np.ndarray:
        """Cells of the base cube inside some generation-``i`` cube (1-based)."""
        mask = np.zeros(self.normalized.shape, dtype=bool)
        for c in self.generations[i - 1].cubes:
            mask[tuple(slice(a - b, e - b) for a, e, b in zip(c.lo, c.hi, self.base.lo))] = True
        return mask

    def deviation(self) -> np.ndarray:
        """``|f - |f|_{Q0}|^p`` of the normalized function on the base cube."""
        x = self.normalized
        ref = np.abs(x[self.active]).mean()
        return np.abs(x - ref) ** self.p

    def off_generation_max(self, i: int) -> float:
        outside = self.active & ~self.covered(i)
        if not outside.any():
            return 0.0
        return float(self.deviation()[outside].max())

    def check(self) -> dict:
        """Evaluate the per-run invariants of the construction."""
        n = self.base_dim
        out = {"window": True, "nesting": True, "measure": True, "off_generation": "tight"}
        q0 = self.base.measure
        for i, gen in enumerate(self.generations, start=1):
            if len(gen.averages):
                w = (gen.averages > self.tau) & (gen.averages <= 2**n * self.tau * (1 + 1e-12))
                out["window"] &= bool(w.all())
            out["measure"] &= gen.measure <= self.tau ** (-i) * q0 * (1 + 1e-12)
            if i > 1:
                prev = self.generations[i - 2].cubes
                out["nesting"] &= all(prev[j].contains(c) for c, j in zip(gen.cubes, gen.parents))
            m = self.off_generation_max(i)
            if m > i * 2 ** (n + 1) * self.tau * (1 + 1e-12):
                if m > i * 2 ** (n + 2) * self.tau * (1 + 1e-12):
                    out["off_generation"] = "violated"
                elif out["off_generation"] == "tight":
                    out["off_generation"] = "weak"
        return out

    @property
    def base_dim(self) -> int:
        return len(self.base.lo)


def jn_generations(f: GridFunction, base: Cube, p: float = 1.0, tau: float = DEFAULT_TAU, depth: int = 4) -> JNGenerations:
    """Iterate the Calderón–Zygmund selection ``depth`` times.

    ``f`` is rescaled by its barred ``(p, n)`` seminorm over the dyadic
    subcubes of ``base``. Generation 1 decomposes ``|f - |f|_{Q0}|^p`` in the
    base cube; generation ``i + 1`` decomposes ``|f - |f|_R|^p`` inside each
    generation-``i`` cube ``R``.
    """
    if not 0 < p <= 1:
        raise GridError("p must lie in (0, 1]")
    if not tau > 1:
        raise GridError("tau must exceed 1")
    if depth < 1:
        raise GridError("depth must be >= 1")
    size = _dyadic_side(base)
    dom = f.domain
    n = dom.n
    fam = enumerate_cubes(dom, "dyadic", base=base)
    s = seminorm(f, SeminormSpec(p, float(n), "barred", "volume"), fam).root
    act_full = dom.active
    act = act_full[base.slices]
    if s == 0.0:
        return JNGenerations(base, p, tau, depth, 0.0, np.zeros(act.shape), act, [])
    ft = f.values / s
    out = JNGenerations(base, float(p), float(tau), depth, float(s), ft[base.slices].copy(), act)
    parents_cubes = [(base.lo, size)]
    for _ in range(depth):
        cubes, avgs, refs, parents = [], [], [], []
        for j, (lo, sz) in enumerate(parents_cubes):
            sl = tuple(slice(a, a + sz) for a in lo)
            ref = np.abs(ft[sl][act_full[sl]]).mean()
            drive = np.zeros(dom.shape)
            drive[sl] = np.abs(ft[sl] - ref) ** p
            for klo, ksz, avg in _select(drive, act_full, lo, sz, tau):
                c = make_cube(dom, klo, tuple(a + ksz for a in klo))
                ksl = c.slices
                cubes.append(c)
                avgs.append(avg)
                refs.append(float(np.abs(ft[ksl][act_full[ksl]]).mean()))
                parents.append(j)
        out.generations.append(Generation(cubes, np.array(avgs), np.array(refs), np.array(parents, dtype=int)))
        parents_cubes = [(c.lo, c.extent[0]) for c in cubes]
    return out


@dataclass
class DecayProfile:
    thresholds: np.ndarray
    fractions: np.ndarray

    def to_csv(self) -> str:
        rows = ["t,fraction"] + [f"{t!r},{m!r}" for t, m in zip(self.thresholds.tolist(), self.fractions.tolist())]
        return "\n".join(rows) + "\n"

    def as_dict(self) -> dict:
        return {"thresholds": self.thresholds.tolist(), "fractions": self.fractions.tolist()}


def _region_samples(g: GridFunction, region: Cube | None) -> np.ndarray:
    if region is None:
        return g.samples
    x = g.values[region.slices][g.domain.active[region.slices]]
    if x.size == 0:
        raise GridError("empty region")
    return x


def default_thresholds(values, count: int = 32) -> np.ndarray:
    """``count`` log-spaced thresholds between the 50th and 99.5th percentile of ``|values|``."""
    a = np.abs(np.asarray(values, dtype=float))
    lo, hi = np.percentile(a, [50.0, 99.5])
    if lo <= 0:
        pos = a[a > 0]
        if pos.size == 0:
            return np.geomspace(1e-12, 1.0, count)
        lo = pos.min()
    if hi <= lo:
        hi = lo * (1 + 1e-9)
    return np.geomspace(lo, hi, count)


def distribution(g: GridFunction, region: Cube | None = None, thresholds=None) -> DecayProfile:
    """Fraction of the active cells of ``region`` where ``|g| > t`` for each threshold."""
    x = np.abs(_region_samples(g, region))
    t = default_thresholds(x) if thresholds is None else np.asarray(thresholds, dtype=float)
    if t.ndim != 1 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise GridError("thresholds must be positive and strictly increasing")
    xs = np.sort(x)
    above = xs.size - np.searchsorted(xs, t, side="right")
    return DecayProfile(t, above / xs.size)


@dataclass(frozen=True)
class DecayFit:
    c1: float
    c2: float
    r2: float
    t_lo: float
    t_hi: float
    points: int

    def as_dict(self) -> dict:
        return {"c1": self.c1, "c2": self.c2, "r2": self.r2, "t_lo": self.t_lo, "t_hi": self.t_hi, "points": self.points}


def fit_exponential_decay(profile: DecayProfile, t_range=None) -> DecayFit:
    """Least-squares line through ``(t, log mu)``: ``mu ≈ c1 exp(-c2 t)``."""
    t, mu = profile.thresholds, profile.fractions
    sel = mu > 0
    if t_range is not None:
        sel &= (t >= t_range[0]) & (t <= t_range[1])
    if sel.sum() < 3:
        raise DecayFitError(f"need at least 3 positive profile points, got {int(sel.sum())}")
    x, y = t[sel], np.log(mu[sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot <= 1e-30 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return DecayFit(float(np.exp(intercept)), float(-slope), r2, float(x[0]), float(x[-1]), int(sel.sum()))


def constructive_bound(thresholds, scale: float, tau: float, n: int, factor: float | None = None) -> np.ndarray:
    """``tau ** -floor(t / (factor * tau * scale))`` with ``factor = 2^(n+1)`` by default."""
    factor = 2.0 ** (n + 1) if factor is None else factor
    t = np.asarray(thresholds, dtype=float)
    return tau ** (-np.floor(t / (factor * tau * scale)))


def exp_integrability(f: GridFunction, family: CubeFamily, c4: float) -> float:
    """Sup over cubes of ``avg_Q (exp(c4 |f - |f|_Q|) - 1)``."""
    best = 0.0
    for idx, x, act in iter_windows(f, family):
        cnt = act.sum(axis=1)
        ok = cnt > 0
        x, act, cnt = x[ok], act[ok], cnt[ok]
        ref = np.sum(np.abs(x), axis=1) / cnt
        v = np.sum(np.where(act, np.expm1(c4 * np.abs(x - ref[:, None])), 0.0), axis=1) / cnt
        if v.size:
            best = max(best, float(v.max()))
    return best
