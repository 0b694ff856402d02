"""Local, global, fractional and bilinear maximal operators, commutators, and
the maximal-function characterization statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter

from .grid import (
    EXACT_CELL_LIMIT,
    Cube,
    CubeFamily,
    GridError,
    GridFunction,
    competitor_family,
    windows,
)


def _check_alpha(alpha, n):
    if not 0 <= alpha < n:
        raise GridError(f"fractional order must lie in [0, {n}), got {alpha}")


def _cube_averages(f: GridFunction, family: CubeFamily, alpha: float) -> np.ndarray:
    """``|Q|^(alpha/n - 1) * integral_Q |f|`` per cube; ``-inf`` on empty cubes."""
    n = f.domain.n
    vol = f.domain.cell_volume
    absvals = np.abs(f.values)
    active = f.domain.active
    out = np.full(len(family), -np.inf)
    for extent, idx in family.groups():
        x = windows(absvals, family, extent, idx)
        cnt = windows(active, family, extent, idx).sum(axis=1)
        ok = cnt > 0
        s = x[ok].sum(axis=1)
        if alpha == 0:
            out[idx[ok]] = s / cnt[ok]
        else:
            out[idx[ok]] = s * vol / family.measures[idx[ok]] ** (1.0 - alpha / n)
    return out


def _scatter_max(family: CubeFamily, vals: np.ndarray) -> np.ndarray:
    """Per cell of the family region, the max of ``vals`` over cubes containing it."""
    rlo, rhi = family.region()
    rext = tuple(b - a for a, b in zip(rlo, rhi))
    out = np.full(rext, -np.inf)
    rlo_arr = np.asarray(rlo)
    for extent, idx in family.groups():
        pos_shape = tuple(r - e + 1 for r, e in zip(rext, extent))
        grid = np.full(pos_shape, -np.inf)
        starts = family.lo[idx] - rlo_arr
        np.maximum.at(grid, tuple(starts.T), vals[idx])
        padded = np.pad(grid, [(e - 1, e - 1) for e in extent], constant_values=-np.inf)
        filt = maximum_filter(padded, size=extent, mode="constant", cval=-np.inf)
        sl = tuple(slice(e // 2, e // 2 + r) for e, r in zip(extent, rext))
        np.maximum(out, filt[sl], out=out)
    return out


def _region_function(f: GridFunction, family: CubeFamily, cellvals: np.ndarray) -> GridFunction:
    rlo, rhi = family.region()
    sub = f.domain.subdomain(rlo, rhi)
    act = sub.active
    if np.any(act & ~np.isfinite(cellvals)):
        bad = np.argwhere(act & ~np.isfinite(cellvals))[0]
        raise GridError(f"family does not cover active cell {tuple(int(i) + a for i, a in zip(bad, rlo))}")
    return GridFunction(sub, np.where(act, cellvals, 0.0))


def _region_slices(family: CubeFamily) -> tuple:
    rlo, rhi = family.region()
    return tuple(slice(a, b) for a, b in zip(rlo, rhi))


def global_maximal(f: GridFunction, family: CubeFamily, alpha: float = 0.0) -> GridFunction:
    """Pointwise sup over family cubes ``Q ∋ x`` of ``|Q|^(alpha/n-1) ∫_Q |f|``.

    The result lives on the family's base cube when it has one, otherwise on
    the whole domain; every active cell there must be covered.
    """
    _check_alpha(alpha, f.domain.n)
    if not f.domain.same_grid(family.domain):
        raise GridError("domain mismatch")
    vals = _cube_averages(f, family, alpha)
    return _region_function(f, family, _scatter_max(family, vals))


def local_maximal(f: GridFunction, cube: Cube, alpha: float = 0.0) -> GridFunction:
    """``M_{alpha,Q} f`` on ``cube``: sup over subcubes of ``cube`` containing x."""
    _check_alpha(alpha, f.domain.n)
    return global_maximal(f, competitor_family(f.domain, cube), alpha)


def local_maximal_exact(cube: Cube) -> bool:
    """Whether :func:`local_maximal` scans every cell-aligned subcube."""
    return cube.count <= EXACT_CELL_LIMIT


def bilinear_maximal(f1: GridFunction, f2: GridFunction, family: CubeFamily) -> GridFunction:
    """Pointwise sup over cubes ``Q ∋ x`` of ``|f1|_Q * |f2|_Q``."""
    if not f1.domain.same_grid(f2.domain):
        raise GridError("domain mismatch")
    v = _cube_averages(f1, family, 0.0) * _cube_averages(f2, family, 0.0)
    v = np.where(np.isnan(v), -np.inf, v)
    return _region_function(f1, family, _scatter_max(family, v))


def commutator(b: GridFunction, f: GridFunction, alpha: float, family: CubeFamily) -> GridFunction:
    """``b * M_alpha(f) - M_alpha(b f)`` with the maximal function over ``family``."""
    b._check(f)
    mf = global_maximal(f, family, alpha)
    mbf = global_maximal(b * f, family, alpha)
    bb = b.values[_region_slices(family)]
    return GridFunction(mf.domain, bb * mf.values - mbf.values)


def bilinear_commutator(
    b1: GridFunction, b2: GridFunction, f1: GridFunction, f2: GridFunction, family: CubeFamily
) -> GridFunction:
    """``(b1 + b2) M(f1, f2) - M(b1 f1, f2) - M(f1, b2 f2)``."""
    for g in (b2, f1, f2):
        b1._check(g)
    m = bilinear_maximal(f1, f2, family)
    m1 = bilinear_maximal(b1 * f1, f2, family)
    m2 = bilinear_maximal(f1, b2 * f2, family)
    sl = _region_slices(family)
    bsum = b1.values[sl] + b2.values[sl]
    return GridFunction(m.domain, bsum * m.values - m1.values - m2.values)


def maximal_deviation(b: GridFunction, cube: Cube, alpha: float = 0.0) -> GridFunction:
    """``b - |Q|^(-alpha/n) M_{alpha,Q} b`` on ``cube``."""
    m = local_maximal(b, cube, alpha)
    scale = cube.measure ** (-alpha / b.domain.n) if alpha else 1.0
    return GridFunction(m.domain, b.values[cube.slices] - scale * m.values)


@dataclass
class CharStatistic:
    p: float
    q: float
    alpha: float
    beta: float
    values: np.ndarray
    sup: float
    index: int
    cube: Cube
    exact: bool

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "alpha": self.alpha,
            "beta": self.beta,
            "sup": self.sup,
            "cube": self.cube.as_dict(),
            "exact": self.exact,
        }


def char_statistic(
    b: GridFunction, family: CubeFamily, alpha: float = 0.0, beta: float = 0.0, p: float = 1.0
) -> CharStatistic:
    """Sup over ``Q`` in ``family`` of
    ``|Q|^(-beta/n) * (avg_Q |b - |Q|^(-alpha/n) M_{alpha,Q} b|^p)^(1/p)``.
    """
    _check_alpha(alpha, b.domain.n)
    if beta < 0:
        raise GridError("beta must be nonnegative")
    if p < 1:
        raise GridError("p must be >= 1")
    n = b.domain.n
    vals = np.full(len(family), np.nan)
    exact = True
    for i, cube in enumerate(family):
        if cube.count == 0:
            continue
        exact &= local_maximal_exact(cube)
        dev = maximal_deviation(b, cube, alpha)
        act = dev.domain.active
        avg = np.mean(np.abs(dev.values[act]) ** p)
        vals[i] = cube.measure ** (-beta / n) * avg ** (1.0 / p)
    if np.all(np.isnan(vals)):
        raise GridError("no cube of the family meets the active domain")
    k = int(np.nanargmax(vals))
    return CharStatistic(float(p), float(p), float(alpha), float(beta), vals, float(vals[k]), k, family[k], exact)
