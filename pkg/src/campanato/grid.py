"""Uniform grids over boxes, discrete cubes, cube families and per-cube statistics.

Cubes are sets of whole cells. A cube keeps its unclipped half-side ``rho``
(in real units) even when its index ranges are clipped to the domain, so that
``rho**-lam`` normalizers refer to the ambient cube while integrals run over
the clipped, active part only.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

EXACT_CELL_LIMIT = 4096


class GridError(ValueError):
    """Invalid domain, cube, or family request."""


def _as_tuple(x, n, cast):
    if np.ndim(x) == 0:
        return tuple(cast(x) for _ in range(n))
    t = tuple(cast(v) for v in x)
    if len(t) != n:
        raise GridError(f"expected {n} entries, got {len(t)}")
    return t


@dataclass(frozen=True, eq=False)
class Domain:
    """Box ``lower + [0, side)^n`` cut into square cells.

    ``side`` and ``resolution`` may be given per axis, but the cell width
    ``side_i / resolution_i`` must agree on every axis.
    """

    n: int
    side: float | tuple = 1.0
    resolution: int | tuple = 64
    lower: float | tuple | None = None
    mask: np.ndarray | None = None

    def __post_init__(self):
        if self.n not in (1, 2):
            raise GridError(f"dimension must be 1 or 2, got {self.n}")
        res = _as_tuple(self.resolution, self.n, int)
        if min(res) < 1:
            raise GridError(f"resolution must be >= 1 per axis, got {res}")
        side = _as_tuple(self.side, self.n, float)
        if min(side) <= 0:
            raise GridError("side must be positive")
        widths = [s / r for s, r in zip(side, res)]
        if not np.allclose(widths, widths[0], rtol=1e-12, atol=0):
            raise GridError(f"cells must be square, got widths {widths}")
        lower = _as_tuple(0.0 if self.lower is None else self.lower, self.n, float)
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "lower", lower)
        if self.mask is not None:
            mask = np.array(self.mask, dtype=bool).reshape(res)
            if not mask.any():
                raise GridError("mask selects no cells")
            mask.setflags(write=False)
            object.__setattr__(self, "mask", mask)

    @property
    def shape(self) -> tuple:
        return self.resolution

    @property
    def width(self) -> float:
        return self.side[0] / self.resolution[0]

    @property
    def cell_volume(self) -> float:
        return self.width ** self.n

    @property
    def active(self) -> np.ndarray:
        if self.mask is None:
            return np.ones(self.shape, dtype=bool)
        return self.mask

    @property
    def n_active(self) -> int:
        return int(self.active.sum())

    def centers(self, axis: int = 0) -> np.ndarray:
        return self.lower[axis] + (np.arange(self.resolution[axis]) + 0.5) * self.width

    def coords(self) -> np.ndarray:
        """Cell-center coordinates, shape ``(*shape, n)``."""
        axes = [self.centers(i) for i in range(self.n)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def subdomain(self, lo: Sequence[int], hi: Sequence[int]) -> "Domain":
        lo, hi = tuple(lo), tuple(hi)
        ext = tuple(b - a for a, b in zip(lo, hi))
        h = self.width
        mask = None
        if self.mask is not None:
            mask = self.mask[tuple(slice(a, b) for a, b in zip(lo, hi))]
        return Domain(
            self.n,
            side=tuple(e * h for e in ext),
            resolution=ext,
            lower=tuple(l + a * h for l, a in zip(self.lower, lo)),
            mask=mask,
        )

    def same_grid(self, other: "Domain") -> bool:
        return (
            self.n == other.n
            and self.resolution == other.resolution
            and np.allclose(self.side, other.side)
            and np.allclose(self.lower, other.lower)
            and np.array_equal(self.active, other.active)
        )


class GridFunction:
    """Real samples on the active cells of a :class:`Domain`.

    ``values`` holds the full cell array; inactive cells are stored as 0.
    """

    def __init__(self, domain: Domain, values):
        arr = np.asarray(values, dtype=float)
        active = domain.active
        if arr.shape == domain.shape:
            full = np.where(active, arr, 0.0)
        elif arr.ndim == 1 and arr.size == domain.n_active:
            full = np.zeros(domain.shape)
            full[active] = arr
        else:
            raise GridError(
                f"sample count mismatch: expected {domain.n_active} active samples "
                f"or shape {domain.shape}, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(full[active])):
            raise GridError("samples must be finite")
        full.setflags(write=False)
        self.domain = domain
        self.values = full

    @property
    def samples(self) -> np.ndarray:
        return self.values[self.domain.active]

    def __repr__(self):
        return f"GridFunction(n={self.domain.n}, shape={self.domain.shape})"

    def _check(self, other: "GridFunction"):
        if not self.domain.same_grid(other.domain):
            raise GridError("domain mismatch")

    def _binary(self, other, op):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.domain, op(self.values, other.values))
        return GridFunction(self.domain, op(self.values, float(other)))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.domain, -self.values)

    def __abs__(self):
        return GridFunction(self.domain, np.abs(self.values))

    def restrict(self, cube: "Cube") -> "GridFunction":
        sub = self.domain.subdomain(cube.lo, cube.hi)
        return GridFunction(sub, self.values[cube.slices])


@dataclass(frozen=True)
class Cube:
    lo: tuple
    hi: tuple
    rho: float
    center: tuple
    count: int
    measure: float

    @property
    def extent(self) -> tuple:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @property
    def slices(self) -> tuple:
        return tuple(slice(a, b) for a, b in zip(self.lo, self.hi))

    @property
    def side(self) -> float:
        return 2.0 * self.rho

    def contains(self, other: "Cube") -> bool:
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def as_dict(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi), "rho": self.rho, "measure": self.measure}


def _active_count(domain: Domain, lo, hi) -> int:
    return int(domain.active[tuple(slice(a, b) for a, b in zip(lo, hi))].sum())


def make_cube(domain: Domain, lo, hi, rho: float | None = None) -> Cube:
    """Cell-aligned cube with index ranges ``[lo, hi)``.

    Without ``rho`` the ranges must have equal extents and ``rho`` is half
    the continuous side.
    """
    lo = tuple(int(a) for a in lo)
    hi = tuple(int(b) for b in hi)
    if len(lo) != domain.n or len(hi) != domain.n:
        raise GridError("index ranges must match the dimension")
    if any(a < 0 or b > r or b <= a for a, b, r in zip(lo, hi, domain.resolution)):
        raise GridError(f"empty or out-of-range cube {lo}..{hi}")
    h = domain.width
    if rho is None:
        ext = {b - a for a, b in zip(lo, hi)}
        if len(ext) != 1:
            raise GridError("unequal extents need an explicit rho")
        rho = ext.pop() * h / 2.0
    center = tuple(l + 0.5 * (a + b) * h for l, a, b in zip(domain.lower, lo, hi))
    count = _active_count(domain, lo, hi)
    return Cube(lo, hi, float(rho), center, count, count * domain.cell_volume)


def cube_at(domain: Domain, center, rho: float) -> Cube:
    """``Q(center, rho)`` clipped to the domain: the cells whose centers lie in
    ``[center - rho, center + rho)`` on every axis."""
    if rho <= 0:
        raise GridError("rho must be positive")
    center = _as_tuple(center, domain.n, float)
    h = domain.width
    lo, hi = [], []
    for c, l, r in zip(center, domain.lower, domain.resolution):
        a = math.ceil((c - rho - l) / h - 0.5 - 1e-9)
        b = math.ceil((c + rho - l) / h - 0.5 - 1e-9)
        a, b = max(a, 0), min(b, r)
        if b <= a:
            raise GridError("cube misses the domain")
        lo.append(a)
        hi.append(b)
    count = _active_count(domain, lo, hi)
    return Cube(tuple(lo), tuple(hi), float(rho), center, count, count * domain.cell_volume)


@dataclass(frozen=True)
class Sliding:
    """Vertex-centered cubes ``[v - k, v + k)`` (in cells) for vertices on a
    ``stride`` lattice and half-sides ``k`` in ``scales``; clipped to the
    domain when ``clip`` is true, otherwise only cubes fully inside are kept."""

    stride: int = 1
    scales: tuple = (1,)
    clip: bool = True


POLICIES = ("dyadic", "anchored", "dyadic_shifted")


class CubeFamily:
    """An ordered, duplicate-free list of cubes stored as index arrays."""

    def __init__(self, domain: Domain, policy, lo, hi, rho, base: Cube | None = None):
        lo = np.asarray(lo, dtype=np.int64).reshape(-1, domain.n)
        hi = np.asarray(hi, dtype=np.int64).reshape(-1, domain.n)
        rho = np.asarray(rho, dtype=float).reshape(-1)
        order = np.lexsort(
            tuple(hi[:, i] for i in reversed(range(domain.n)))
            + tuple(lo[:, i] for i in reversed(range(domain.n)))
            + (rho, -(hi - lo).prod(axis=1))
        )
        lo, hi, rho = lo[order], hi[order], rho[order]
        if len(lo):
            key = np.concatenate([lo, hi, rho[:, None]], axis=1)
            keep = np.ones(len(lo), dtype=bool)
            keep[1:] = np.any(key[1:] != key[:-1], axis=1)
            lo, hi, rho = lo[keep], hi[keep], rho[keep]
        self.domain = domain
        self.policy = policy
        self.lo, self.hi, self.rho = lo, hi, rho
        self.base = base
        self.counts = _box_counts(domain.active, lo, hi)
        self.measures = self.counts * domain.cell_volume

    def __len__(self):
        return len(self.rho)

    def __getitem__(self, i) -> Cube:
        lo, hi = tuple(int(a) for a in self.lo[i]), tuple(int(b) for b in self.hi[i])
        h = self.domain.width
        center = tuple(l + 0.5 * (a + b) * h for l, a, b in zip(self.domain.lower, lo, hi))
        return Cube(lo, hi, float(self.rho[i]), center, int(self.counts[i]), float(self.measures[i]))

    def __iter__(self) -> Iterator[Cube]:
        return (self[i] for i in range(len(self)))

    @property
    def extents(self) -> np.ndarray:
        return self.hi - self.lo

    def groups(self):
        """Yield ``(extent, indices)`` for cubes sharing an extent, in first-seen order."""
        ext = self.extents
        if not len(ext):
            return
        uniq, first, inverse = np.unique(ext, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.reshape(-1)
        for g in np.argsort(first):
            yield tuple(int(e) for e in uniq[g]), np.flatnonzero(inverse == g)

    def region(self) -> tuple:
        """Index ranges the family lives in: the base cube, else the domain."""
        if self.base is not None:
            return self.base.lo, self.base.hi
        return (0,) * self.domain.n, self.domain.resolution


def _box_counts(active: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    sat = np.zeros(tuple(s + 1 for s in active.shape), dtype=np.int64)
    sat[tuple(slice(1, None) for _ in active.shape)] = active
    for ax in range(active.ndim):
        sat = sat.cumsum(axis=ax)
    out = np.zeros(len(lo), dtype=np.int64)
    n = active.ndim
    for corner in itertools.product((0, 1), repeat=n):
        idx = tuple(np.where(c, hi[:, i], lo[:, i]) for i, c in enumerate(corner))
        sign = (-1) ** (n - sum(corner))
        out += sign * sat[idx]
    return out


def _dyadic(region_lo, region_hi, shifted=False):
    ext = [b - a for a, b in zip(region_lo, region_hi)]
    n = len(ext)
    size = 1
    los = []
    sizes = []
    while size <= min(ext):
        offsets = [0] if not shifted or size == 1 else [0, size // 2]
        for off in offsets:
            axes = [np.arange(a + off, b - size + 1, size) for a, b in zip(region_lo, region_hi)]
            if any(len(ax) == 0 for ax in axes):
                continue
            grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
            los.append(grid)
            sizes.append(np.full(len(grid), size))
        size *= 2
    lo = np.concatenate(los)
    s = np.concatenate(sizes)
    return lo, lo + s[:, None], s


def _anchored(region_lo, region_hi):
    ext = [b - a for a, b in zip(region_lo, region_hi)]
    n = len(ext)
    los, sizes = [], []
    for size in range(1, min(ext) + 1):
        axes = [np.arange(a, b - size + 1) for a, b in zip(region_lo, region_hi)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        los.append(grid)
        sizes.append(np.full(len(grid), size))
    lo = np.concatenate(los)
    s = np.concatenate(sizes)
    return lo, lo + s[:, None], s


def _sliding(region_lo, region_hi, policy: Sliding):
    n = len(region_lo)
    if policy.stride < 1 or not policy.scales or min(policy.scales) < 1:
        raise GridError("sliding policy needs stride >= 1 and positive scales")
    ext = [b - a for a, b in zip(region_lo, region_hi)]
    if max(policy.scales) > max(ext):
        raise GridError(f"scale {max(policy.scales)} larger than region extent {max(ext)}")
    axes = [np.arange(a, b + 1, policy.stride) for a, b in zip(region_lo, region_hi)]
    verts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    los, his, ks = [], [], []
    rlo, rhi = np.array(region_lo), np.array(region_hi)
    for k in policy.scales:
        lo, hi = verts - k, verts + k
        if policy.clip:
            lo, hi = np.maximum(lo, rlo), np.minimum(hi, rhi)
            keep = np.all(hi > lo, axis=1)
        else:
            keep = np.all((lo >= rlo) & (hi <= rhi), axis=1)
        los.append(lo[keep])
        his.append(hi[keep])
        ks.append(np.full(int(keep.sum()), k))
    return np.concatenate(los), np.concatenate(his), np.concatenate(ks)


def enumerate_cubes(domain: Domain, policy="anchored", base: Cube | None = None) -> CubeFamily:
    """Generate the cube family for ``policy`` inside ``base`` (or the domain).

    ``policy`` is ``"dyadic"``, ``"anchored"`` (every cell-aligned subcube),
    ``"dyadic_shifted"`` (dyadic plus half-shifted dyadic), or a
    :class:`Sliding` instance.
    """
    if domain.n_active == 0:
        raise GridError("empty domain")
    if base is None:
        rlo, rhi = (0,) * domain.n, domain.resolution
    else:
        rlo, rhi = base.lo, base.hi
    h = domain.width
    if isinstance(policy, Sliding):
        lo, hi, k = _sliding(rlo, rhi, policy)
        rho = k * h
    elif policy == "dyadic":
        lo, hi, s = _dyadic(rlo, rhi)
        rho = s * h / 2.0
    elif policy == "dyadic_shifted":
        lo, hi, s = _dyadic(rlo, rhi, shifted=True)
        rho = s * h / 2.0
    elif policy == "anchored":
        lo, hi, s = _anchored(rlo, rhi)
        rho = s * h / 2.0
    else:
        raise GridError(f"unknown cube policy {policy!r}")
    return CubeFamily(domain, policy, lo, hi, rho, base=base)


def default_policy(domain: Domain) -> str:
    if domain.n == 2 or max(domain.resolution) > 256:
        return "dyadic"
    return "anchored"


def default_family(domain: Domain, base: Cube | None = None) -> CubeFamily:
    return enumerate_cubes(domain, default_policy(domain), base)


def competitor_family(domain: Domain, cube: Cube) -> CubeFamily:
    """Competitor subcubes for the local maximal function on ``cube``.

    Every cell-aligned subcube when the cube is small enough, otherwise the
    dyadic plus half-shifted dyadic subcubes.
    """
    policy = "anchored" if cube.count <= EXACT_CELL_LIMIT else "dyadic_shifted"
    return enumerate_cubes(domain, policy, base=cube)


def windows(values: np.ndarray, family: CubeFamily, extent: tuple, idx: np.ndarray) -> np.ndarray:
    """Cell values of the cubes ``family[idx]`` (all of extent ``extent``),
    flattened to shape ``(len(idx), prod(extent))``."""
    view = sliding_window_view(values, extent)
    starts = tuple(family.lo[idx, i] for i in range(family.domain.n))
    return view[starts].reshape(len(idx), -1)


def iter_windows(f: GridFunction, family: CubeFamily):
    """Yield ``(indices, samples, active)`` per extent group of ``family``."""
    if not f.domain.same_grid(family.domain):
        raise GridError("function and family live on different domains")
    active = f.domain.active
    for extent, idx in family.groups():
        yield idx, windows(f.values, family, extent, idx), windows(active, family, extent, idx)


@dataclass(frozen=True)
class CubeStats:
    mean: float
    abs_mean: float
    p: float
    osc_mean: float
    osc_abs_mean: float
    osc_abs_plus: float
    osc_absval_mean: float
    osc_absval_plus: float

    @property
    def neg_mean(self) -> float:
        return 0.5 * (self.abs_mean - self.mean)


def cube_stats(f: GridFunction, cube: Cube, p: float) -> CubeStats:
    """Averages of ``f`` and ``|f|`` over the active part of ``cube`` and the
    five ``p``-oscillation means:

    ``|f - f_Q|^p``, ``|f - |f|_Q|^p``, ``|f + |f|_Q|^p``,
    ``||f| - f_Q|^p``, ``||f| + f_Q|^p``.
    """
    if p <= 0:
        raise GridError("p must be positive")
    sel = f.domain.active[cube.slices]
    x = f.values[cube.slices][sel]
    if x.size == 0:
        raise GridError("cube is disjoint from the active domain")
    m = x.mean()
    a = np.abs(x)
    am = a.mean()
    return CubeStats(
        mean=float(m),
        abs_mean=float(am),
        p=float(p),
        osc_mean=float(np.mean(np.abs(x - m) ** p)),
        osc_abs_mean=float(np.mean(np.abs(x - am) ** p)),
        osc_abs_plus=float(np.mean(np.abs(x + am) ** p)),
        osc_absval_mean=float(np.mean(np.abs(a - m) ** p)),
        osc_absval_plus=float(np.mean(np.abs(a + m) ** p)),
    )


def integrate(f: GridFunction, cube: Cube | None = None) -> float:
    """Midpoint-rule integral over the active part of ``cube`` (or the domain)."""
    vals = f.values if cube is None else f.values[cube.slices]
    return float(vals.sum() * f.domain.cell_volume)


def measure_condition_constant(domain: Domain, family: CubeFamily) -> float:
    """Smallest ``|Q ∩ Ω| / rho^n`` over the family."""
    if len(family) == 0:
        raise GridError("empty family")
    if np.any(family.counts == 0):
        i = int(np.flatnonzero(family.counts == 0)[0])
        raise GridError(f"cube {family[i].lo}..{family[i].hi} misses the active domain")
    return float(np.min(family.measures / family.rho ** domain.n))


def extremes(f: GridFunction) -> tuple[float, float]:
    """``(sup f+, sup f-)`` over the active samples."""
    s = f.samples
    return float(np.max(np.maximum(s, 0.0))), float(np.max(-np.minimum(s, 0.0)))
