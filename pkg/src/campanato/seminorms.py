"""Morrey, Campanato and barred/tilde-class seminorm functionals over cube families."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Cube, CubeFamily, GridError, GridFunction, iter_windows

KINDS = (
    "morrey",
    "campanato",
    "barred",
    "tilde",
    "abs_minus_mean",
    "abs_plus_mean",
    "inf_nonneg",
    "inf_nonpos",
)
NORMALIZATIONS = ("radius", "volume")
CONSTRAINTS = ("nonneg", "nonpos", "free")

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SeminormSpec:
    p: float = 1.0
    lam: float = 1.0
    kind: str = "barred"
    normalization: str = "volume"

    def __post_init__(self):
        if not self.p > 0:
            raise GridError(f"p must be positive, got {self.p}")
        if not self.lam >= 0:
            raise GridError(f"lambda must be nonnegative, got {self.lam}")
        if self.kind not in KINDS:
            raise GridError(f"unknown seminorm kind {self.kind!r}")
        if self.normalization not in NORMALIZATIONS:
            raise GridError(f"unknown normalization {self.normalization!r}")

    @classmethod
    def bmo(cls, n: int) -> "SeminormSpec":
        return cls(p=1.0, lam=float(n), kind="campanato", normalization="volume")

    def as_dict(self) -> dict:
        return {"p": self.p, "lambda": self.lam, "kind": self.kind, "normalization": self.normalization}


@dataclass
class SeminormReport:
    spec: SeminormSpec
    values: np.ndarray
    sup: float
    index: int
    cube: Cube

    @property
    def root(self) -> float:
        """The norm-scale value ``sup ** (1/p)``."""
        return self.sup ** (1.0 / self.spec.p)

    def as_dict(self, include_values: bool = False) -> dict:
        out = {
            "spec": self.spec.as_dict(),
            "sup": self.sup,
            "root": self.root,
            "cube": self.cube.as_dict(),
        }
        if include_values:
            out["values"] = self.values.tolist()
        return out


def _constraint_bounds(constraint: str):
    if constraint == "nonneg":
        return 0.0, np.inf
    if constraint == "nonpos":
        return -np.inf, 0.0
    if constraint == "free":
        return -np.inf, np.inf
    raise GridError(f"unknown constraint {constraint!r}")


def _objective(x, act, c, p):
    return np.sum(np.where(act, np.abs(x - c[:, None]) ** p, 0.0), axis=1)


def minimizing_constants(x: np.ndarray, act: np.ndarray, p: float, constraint: str = "nonneg") -> np.ndarray:
    """Row-wise global minimizers of ``c -> sum |x - c|^p`` over the constraint set.

    ``x`` and ``act`` have shape ``(k, m)``; inactive entries are ignored.
    """
    lo_c, hi_c = _constraint_bounds(constraint)
    x = np.asarray(x, dtype=float)
    act = np.asarray(act, dtype=bool)
    if p == 1.0:
        c = np.nanmedian(np.where(act, x, np.nan), axis=1)
        return np.clip(c, lo_c, hi_c)
    if p == 2.0:
        c = np.sum(np.where(act, x, 0.0), axis=1) / act.sum(axis=1)
        return np.clip(c, lo_c, hi_c)
    if p > 1.0:
        # convex: the constrained minimizer lies in the projected hull of the samples
        a = np.clip(np.min(np.where(act, x, np.inf), axis=1), lo_c, hi_c)
        b = np.clip(np.max(np.where(act, x, -np.inf), axis=1), lo_c, hi_c)
        c1 = b - _GOLDEN * (b - a)
        c2 = a + _GOLDEN * (b - a)
        f1, f2 = _objective(x, act, c1, p), _objective(x, act, c2, p)
        for _ in range(80):
            left = f1 <= f2
            # left: minimum in [a, c2]; the old c1 becomes the new c2
            a, b = np.where(left, a, c1), np.where(left, c2, b)
            new = np.where(left, b - _GOLDEN * (b - a), a + _GOLDEN * (b - a))
            fn = _objective(x, act, new, p)
            c1, c2, f1, f2 = (
                np.where(left, new, c2),
                np.where(left, c1, new),
                np.where(left, fn, f2),
                np.where(left, f1, fn),
            )
        return 0.5 * (a + b)
    # p < 1: concave between consecutive sample values, so a minimizer is a
    # (projected) sample value
    cand = np.clip(x, lo_c, hi_c)
    out = np.empty(len(x))
    chunk = max(1, 2_000_000 // max(1, x.shape[1] ** 2))
    for s in range(0, len(x), chunk):
        xs, acts, cs = x[s : s + chunk], act[s : s + chunk], cand[s : s + chunk]
        diff = np.abs(xs[:, None, :] - cs[:, :, None]) ** p
        obj = np.sum(np.where(acts[:, None, :], diff, 0.0), axis=2)
        obj = np.where(acts, obj, np.inf)
        best = np.argmin(obj, axis=1)
        out[s : s + chunk] = cs[np.arange(len(cs)), best]
    return out


def minimizing_constant(f: GridFunction, cube: Cube, p: float, constraint: str = "nonneg") -> float:
    """Global minimizer of ``c -> sum_Q |f - c|^p`` with ``c`` restricted by
    ``constraint`` (``"nonneg"``, ``"nonpos"`` or ``"free"``)."""
    if p <= 0:
        raise GridError("p must be positive")
    act = f.domain.active[cube.slices].reshape(1, -1)
    if not act.any():
        raise GridError("cube is disjoint from the active domain")
    x = f.values[cube.slices].reshape(1, -1)
    return float(minimizing_constants(x, act, p, constraint)[0])


def _integrand(x, act, cnt, kind, p):
    mean = np.sum(x, axis=1) / cnt
    absmean = np.sum(np.abs(x), axis=1) / cnt
    if kind == "morrey":
        d = x
    elif kind == "campanato":
        d = x - mean[:, None]
    elif kind == "barred":
        d = x - absmean[:, None]
    elif kind == "tilde":
        d = x + absmean[:, None]
    elif kind == "abs_minus_mean":
        d = np.abs(x) - mean[:, None]
    elif kind == "abs_plus_mean":
        d = np.abs(x) + mean[:, None]
    else:
        c = minimizing_constants(x, act, p, "nonneg" if kind == "inf_nonneg" else "nonpos")
        d = x - c[:, None]
    return np.sum(np.where(act, np.abs(d) ** p, 0.0), axis=1)


def cube_values(f: GridFunction, spec: SeminormSpec, family: CubeFamily) -> np.ndarray:
    """Normalized per-cube values ``N(Q) * integral_Q |...|^p``; cubes with no
    active cells get ``nan``."""
    out = np.full(len(family), np.nan)
    n = f.domain.n
    vol = f.domain.cell_volume
    for idx, x, act in iter_windows(f, family):
        cnt = act.sum(axis=1)
        ok = cnt > 0
        if not ok.any():
            continue
        idx, x, act, cnt = idx[ok], x[ok], act[ok], cnt[ok]
        integral = _integrand(x, act, cnt, spec.kind, spec.p) * vol
        if spec.normalization == "radius":
            norm = family.rho[idx] ** (-spec.lam)
        else:
            norm = family.measures[idx] ** (-spec.lam / n)
        out[idx] = norm * integral
    return out


def seminorm(f: GridFunction, spec: SeminormSpec, family: CubeFamily) -> SeminormReport:
    """Supremum over ``family`` of the normalized per-cube functional of ``spec``.

    Values are at the ``p``-th power scale; ``report.root`` is the norm scale.
    Ties go to the first cube in family order.
    """
    if len(family) == 0:
        raise GridError("empty family")
    vals = cube_values(f, spec, family)
    if np.all(np.isnan(vals)):
        raise GridError("no cube of the family meets the active domain")
    i = int(np.nanargmax(vals))
    return SeminormReport(spec, vals, float(vals[i]), i, family[i])


@dataclass(frozen=True)
class HolderEstimate:
    value: float
    beta: float
    exact: bool

    def __float__(self):
        return self.value


def _offsets(domain, exact):
    res = domain.resolution
    if domain.n == 1:
        if exact:
            return [(d,) for d in range(1, res[0])]
        return [(2**j,) for j in range(int(np.log2(max(res[0] - 1, 1))) + 1)]
    if exact:
        return [
            (dx, dy)
            for dx in range(0, res[0])
            for dy in range(-res[1] + 1, res[1])
            if (dx, dy) > (0, 0)
        ]
    out = []
    for j in range(int(np.log2(max(max(res) - 1, 1))) + 1):
        d = 2**j
        out += [(d, 0), (0, d), (d, d), (d, -d)]
    return out


def holder_seminorm(f: GridFunction, beta: float) -> HolderEstimate:
    """Largest ``|f(x) - f(y)| / |x - y|^beta`` over pairs of active cell centers.

    Exact (all pairs) up to 4096 cells in 1-D and 64x64 in 2-D; beyond that a
    dyadic offset set is scanned and the estimate is a lower bound.
    """
    if not 0 < beta <= 1:
        raise GridError("beta must lie in (0, 1]")
    dom = f.domain
    if dom.n_active < 2:
        raise GridError("need at least two active cells")
    exact = (dom.n == 1 and dom.resolution[0] <= 4096) or (dom.n == 2 and max(dom.resolution) <= 64)
    v, act, h = f.values, dom.active, dom.width
    best = 0.0
    for off in _offsets(dom, exact):
        a_sl, b_sl = [], []
        skip = False
        for d, r in zip(off, dom.resolution):
            if abs(d) >= r:
                skip = True
                break
            if d >= 0:
                a_sl.append(slice(0, r - d))
                b_sl.append(slice(d, r))
            else:
                a_sl.append(slice(-d, r))
                b_sl.append(slice(0, r + d))
        if skip:
            continue
        a_sl, b_sl = tuple(a_sl), tuple(b_sl)
        ok = act[a_sl] & act[b_sl]
        if not ok.any():
            continue
        diff = np.abs(v[a_sl] - v[b_sl])[ok]
        dist = h * float(np.sqrt(sum(d * d for d in off)))
        best = max(best, float(diff.max()) / dist**beta)
    return HolderEstimate(best, float(beta), exact)


def variant_equivalence_ratio(a: SeminormReport, b: SeminormReport) -> float:
    """``a.root / b.root`` with ``0/0 = 1`` and ``x/0 = inf``."""
    ra, rb = a.root, b.root
    if rb == 0.0:
        return 1.0 if ra == 0.0 else float("inf")
    return ra / rb
