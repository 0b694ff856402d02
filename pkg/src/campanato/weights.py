"""Muckenhoupt constants, reverse Hölder and measure-comparison diagnostics,
the Rubio de Francia iteration, and weighted characterization statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Cube, CubeFamily, GridError, GridFunction, enumerate_cubes, iter_windows
from .maximal import CharStatistic, global_maximal, local_maximal_exact, maximal_deviation


class Weight(GridFunction):
    """A strictly positive grid function."""

    def __init__(self, domain, values):
        super().__init__(domain, values)
        if np.any(self.samples <= 0):
            raise GridError("weight samples must be strictly positive")

    @classmethod
    def of(cls, f: GridFunction) -> "Weight":
        return cls(f.domain, f.values)


def _as_weight(w) -> Weight:
    return w if isinstance(w, Weight) else Weight.of(w)


@dataclass(frozen=True)
class WeightClass:
    tag: str
    p: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        if self.tag not in ("A1", "Ap", "Apq"):
            raise GridError(f"unknown weight class {self.tag!r}")
        if self.tag == "Ap" and not self.p > 1:
            raise GridError("A_p needs p > 1")
        if self.tag == "Apq" and not 1 <= self.p <= self.q:
            raise GridError("A_{p,q} needs 1 <= p <= q")

    @classmethod
    def parse(cls, text: str) -> "WeightClass":
        """``"A1"``, ``"A2"``, ``"Ap:1.5"`` or ``"Apq:2,4"``."""
        t = text.strip()
        if t == "A1":
            return cls("A1")
        if t.startswith("Apq:"):
            p, q = (float(v) for v in t[4:].split(","))
            return cls("Apq", p, q)
        if t.startswith("Ap:"):
            return cls("Ap", float(t[3:]))
        if t.startswith("A"):
            return cls("Ap", float(t[1:]))
        raise GridError(f"cannot parse weight class {text!r}")

    def label(self) -> str:
        if self.tag == "A1":
            return "A1"
        if self.tag == "Ap":
            return f"A{self.p:g}"
        return f"A({self.p:g},{self.q:g})"


@dataclass
class WeightReport:
    weight_class: WeightClass
    value: float
    values: np.ndarray
    index: int
    cube: Cube

    def as_dict(self) -> dict:
        return {
            "class": self.weight_class.label(),
            "p": self.weight_class.p,
            "q": self.weight_class.q,
            "value": self.value,
            "cube": self.cube.as_dict(),
        }


def _power_mean(x, act, cnt, s):
    return np.sum(np.where(act, x**s, 0.0), axis=1) / cnt


def muckenhoupt_constant(w, cls: WeightClass, family: CubeFamily) -> WeightReport:
    """Sup over ``family`` of the defining product of the weight class.

    * ``A1``: ``avg w * max(1/w)``
    * ``Ap``: ``avg w * (avg w^(-1/(p-1)))^(p-1)``
    * ``Apq``: ``(avg w^q)^(1/q) * (avg w^(-p'))^(1/p')``, with ``max(1/w)`` for ``p = 1``
    """
    w = _as_weight(w)
    vals = np.full(len(family), np.nan)
    for idx, x, act in iter_windows(w, family):
        cnt = act.sum(axis=1)
        ok = cnt > 0
        idx, x, act, cnt = idx[ok], x[ok], act[ok], cnt[ok]
        xs = np.where(act, x, 1.0)
        inv_max = np.max(np.where(act, 1.0 / xs, 0.0), axis=1)
        if cls.tag == "A1":
            v = _power_mean(xs, act, cnt, 1.0) * inv_max
        elif cls.tag == "Ap":
            e = -1.0 / (cls.p - 1.0)
            v = _power_mean(xs, act, cnt, 1.0) * _power_mean(xs, act, cnt, e) ** (cls.p - 1.0)
        else:
            first = _power_mean(xs, act, cnt, cls.q) ** (1.0 / cls.q)
            if cls.p == 1.0:
                v = first * inv_max
            else:
                pp = cls.p / (cls.p - 1.0)
                v = first * _power_mean(xs, act, cnt, -pp) ** (1.0 / pp)
        vals[idx] = v
    if np.all(np.isnan(vals)):
        raise GridError("no cube of the family meets the active domain")
    i = int(np.nanargmax(vals))
    return WeightReport(cls, float(vals[i]), vals, i, family[i])


def reverse_holder_exponent(w, family: CubeFamily, C: float = 1.0, q_grid=None) -> float:
    """Largest ``q`` in ``q_grid`` with ``(avg_Q w^q)^(1/q) <= C avg_Q w`` on every cube.

    Returns 1.0 when no grid exponent works (``q = 1`` always does for ``C >= 1``).
    """
    w = _as_weight(w)
    if C < 1:
        raise GridError("C must be >= 1")
    q_grid = np.arange(1.1, 3.0001, 0.1) if q_grid is None else np.asarray(q_grid, dtype=float)
    if np.any(q_grid <= 1):
        raise GridError("q_grid values must exceed 1")
    best = 1.0
    for q in np.sort(q_grid):
        ok = True
        for idx, x, act in iter_windows(w, family):
            cnt = act.sum(axis=1)
            keep = cnt > 0
            x, act, cnt = np.where(act, x, 1.0)[keep], act[keep], cnt[keep]
            lhs = _power_mean(x, act, cnt, q) ** (1.0 / q)
            rhs = C * _power_mean(x, act, cnt, 1.0)
            if np.any(lhs > rhs * (1 + 1e-12)):
                ok = False
                break
        if not ok:
            break
        best = float(q)
    return best


@dataclass(frozen=True)
class SubsetPolicy:
    """Subsets ``S`` of each family cube used by :func:`measure_comparison_exponents`.

    ``extremal`` adds, for every size ``k``, the ``k`` heaviest and ``k``
    lightest cells; those bound ``w(S)`` over every ``k``-cell subset, so the
    returned exponents hold for all cell subsets, not only the sampled ones.
    """

    dyadic: bool = True
    random: int = 64
    extremal: bool = True
    seed: int = 0


def _subset_ratios(wq: np.ndarray, cube: Cube, domain, policy: SubsetPolicy, rng):
    """Pairs ``(|S|/|Q|, w(S)/w(Q))`` for the sampled subsets of one cube."""
    flat = wq.reshape(-1)
    m = flat.size
    total = flat.sum()
    r, v = [], []
    if policy.dyadic:
        sub = domain.subdomain(cube.lo, cube.hi)
        for c in enumerate_cubes(sub, "dyadic"):
            if c.count == m:
                continue
            r.append(c.count / m)
            v.append(wq[c.slices].sum() / total)
    for _ in range(policy.random):
        k = int(rng.integers(1, m))
        pick = rng.choice(m, size=k, replace=False)
        r.append(k / m)
        v.append(flat[pick].sum() / total)
    if policy.extremal:
        srt = np.sort(flat)
        k = np.arange(1, m)
        r += list(k / m) * 2
        v += list(np.cumsum(srt)[:-1] / total) + list(np.cumsum(srt[::-1])[:-1] / total)
    return np.array(r), np.array(v)


@dataclass(frozen=True)
class ComparisonExponents:
    epsilon: float
    L: float
    C: float
    pairs: int

    def holds(self, ratio_measure, ratio_weight, rtol: float = 1e-12) -> bool:
        """``w(S)/w(Q) <= C (|S|/|Q|)^eps`` and ``(|S|/|Q|)^L <= C w(S)/w(Q)``."""
        r = np.asarray(ratio_measure, dtype=float)
        v = np.asarray(ratio_weight, dtype=float)
        upper = v <= self.C * r**self.epsilon * (1 + rtol)
        lower = r**self.L <= self.C * v * (1 + rtol)
        return bool(np.all(upper & lower))


def measure_comparison_exponents(
    w, family: CubeFamily, policy: SubsetPolicy | None = None, C: float = 1.0
) -> ComparisonExponents:
    """Largest ``epsilon`` and smallest ``L`` for which, with constant ``C``,
    ``w(S)/w(Q) <= C (|S|/|Q|)^epsilon`` and ``(|S|/|Q|)^L <= C w(S)/w(Q)``
    hold on every sampled pair, read off the upper and lower envelopes of
    the log-log point cloud. Single-cell cubes are skipped."""
    w = _as_weight(w)
    if w.domain.mask is not None:
        raise GridError("measure comparison needs an unmasked domain")
    if C < 1:
        raise GridError("C must be >= 1")
    policy = SubsetPolicy() if policy is None else policy
    rng = np.random.default_rng(policy.seed)
    eps, L, pairs = np.inf, 0.0, 0
    logc = np.log(C)
    for cube in family:
        if cube.count < 2:
            continue
        r, v = _subset_ratios(w.values[cube.slices], cube, w.domain, policy, rng)
        x, y = -np.log(r), -np.log(v)
        eps = min(eps, float(np.min((y + logc) / x)))
        L = max(L, float(np.max((y - logc) / x)))
        pairs += len(r)
    if pairs == 0:
        raise GridError("family has no cube with two or more cells")
    return ComparisonExponents(max(eps, 0.0), L, float(C), pairs)


def subset_sample(w, family: CubeFamily, policy: SubsetPolicy):
    """The ``(|S|/|Q|, w(S)/w(Q))`` pairs :func:`measure_comparison_exponents` would see."""
    w = _as_weight(w)
    rng = np.random.default_rng(policy.seed)
    rs, vs = [], []
    for cube in family:
        if cube.count < 2:
            continue
        r, v = _subset_ratios(w.values[cube.slices], cube, w.domain, policy, rng)
        rs.append(r)
        vs.append(v)
    return np.concatenate(rs), np.concatenate(vs)


def maximal_growth(g: GridFunction, family: CubeFamily, steps: int = 1) -> float:
    """Largest one-step growth ``||M h||_1 / ||h||_1`` along ``h = |g|, M|g|, ...``
    (``steps`` applications), floored at the sup-norm ratio."""
    h = abs(g)
    best = 0.0
    for _ in range(steps):
        mh = global_maximal(h, family)
        n1 = h.values.sum()
        if n1 > 0:
            best = max(best, mh.values.sum() / n1)
        sup = np.max(h.values)
        if sup > 0:
            best = max(best, np.max(mh.values) / sup)
        h = mh
    return float(best)


@dataclass
class RubioDeFrancia:
    weight: GridFunction
    B: float
    K: int
    tail: float
    growth: float


def rubio_de_francia(g: GridFunction, B: float, K: int, family: CubeFamily) -> RubioDeFrancia:
    """``sum_{k=0..K} M^k g / (2B)^k`` with ``M^0 g = |g|``.

    ``tail = 2 ||M^K g||_inf / (2B)^K`` bounds the truncation error in
    ``M(Rg) <= 2B Rg``. Rejects ``B`` below the observed one-step growth
    of ``M`` on ``|g|``.
    """
    if K < 1:
        raise GridError("K must be >= 1")
    if family.base is not None:
        raise GridError("the iteration needs a family over the whole domain")
    growth = maximal_growth(g, family, 1)
    if B < growth * (1 - 1e-12):
        raise GridError(f"B={B:g} is below the observed one-step growth {growth:g}")
    term = abs(g)
    total = term.values.copy()
    for k in range(1, K + 1):
        term = global_maximal(term, family)
        total = total + term.values / (2.0 * B) ** k
    tail = 2.0 * float(np.max(term.values)) / (2.0 * B) ** K
    return RubioDeFrancia(GridFunction(g.domain, total), float(B), int(K), tail, growth)


def weighted_char_statistic(
    b: GridFunction, w, p: float, q: float, alpha: float, family: CubeFamily
) -> CharStatistic:
    """Sup over cubes of
    ``|Q|^(alpha/n) (∫_Q |b - |Q|^(-alpha/n) M_{alpha,Q} b|^q w^q)^(1/q) / (∫_Q w^p)^(1/p)``.

    Requires ``1/p - 1/q = alpha/n``.
    """
    w = _as_weight(w)
    b._check(w)
    n = b.domain.n
    if not (1 <= p <= q):
        raise GridError("need 1 <= p <= q")
    if abs(1.0 / p - 1.0 / q - alpha / n) > 1e-12:
        raise GridError(f"exponent relation violated: 1/p - 1/q = {1 / p - 1 / q:g}, alpha/n = {alpha / n:g}")
    vol = b.domain.cell_volume
    vals = np.full(len(family), np.nan)
    exact = True
    for i, cube in enumerate(family):
        if cube.count == 0:
            continue
        exact &= local_maximal_exact(cube)
        dev = maximal_deviation(b, cube, alpha)
        act = dev.domain.active
        wq = w.values[cube.slices][act]
        num = (np.sum(np.abs(dev.values[act]) ** q * wq**q) * vol) ** (1.0 / q)
        den = (np.sum(wq**p) * vol) ** (1.0 / p)
        vals[i] = cube.measure ** (alpha / n) * num / den
    if np.all(np.isnan(vals)):
        raise GridError("no cube of the family meets the active domain")
    k = int(np.nanargmax(vals))
    return CharStatistic(float(p), float(q), float(alpha), 0.0, vals, float(vals[k]), k, family[k], exact)
