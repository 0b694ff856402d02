"""Registered numerical checks keyed by short tags, suite execution and report emission."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from . import czd, maximal, seminorms, weights
from .generators import generate, indicator
from .grid import Domain, GridError, GridFunction, enumerate_cubes, make_cube
from .seminorms import SeminormSpec


@dataclass
class SuiteConfig:
    checks: list = field(default_factory=list)
    sizes: list = field(default_factory=lambda: [64, 128])
    policy: str = "auto"
    p_values: list = field(default_factory=lambda: [1.0, 2.0])
    lam_values: list = field(default_factory=lambda: [0.0, 0.5])
    alpha_values: list = field(default_factory=lambda: [0.25, 0.5])
    beta_values: list = field(default_factory=lambda: [0.5, 1.0])
    tau: float = math.e
    samples: int = 5
    tolerance: float = 1e-10
    seed: int = 0
    output_dir: str = "reports"

    @classmethod
    def from_dict(cls, obj: dict) -> "SuiteConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise GridError(f"unknown config fields: {sorted(unknown)}")
        return cls(**obj)

    @classmethod
    def from_file(cls, path) -> "SuiteConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def family(self, domain: Domain):
        if self.policy == "auto":
            from .grid import default_family

            return default_family(domain)
        return enumerate_cubes(domain, self.policy)


@dataclass
class CheckResult:
    tag: str
    passed: bool
    measured: dict
    tolerance: float
    witness: dict | None = None
    runtime: float = 0.0

    def as_dict(self, timings: bool = False) -> dict:
        out = {
            "tag": self.tag,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "measured": self.measured,
            "witness": self.witness,
        }
        if timings:
            out["runtime"] = self.runtime
        return out


CheckFn = Callable[[SuiteConfig], tuple]
REGISTRY: dict = {}


def register(tag: str):
    def deco(fn: CheckFn) -> CheckFn:
        REGISTRY[tag] = fn
        return fn

    return deco


def _line(n):
    return Domain(1, 1.0, n)


def corpus(domain: Domain, seed: int = 0) -> dict:
    """Named sample functions used by the class-equivalence checks."""
    return {
        "constant_pos": generate("constant", domain, c=2.0),
        "constant_neg": generate("constant", domain, c=-1.5),
        "step": generate("step", domain),
        "cusp_half": generate("power_cusp", domain, beta=0.5),
        "cusp_one": generate("power_cusp", domain, beta=1.0),
        "log_pos": generate("log_singularity", domain),
        "log_neg": generate("log_singularity", domain, sign=-1.0),
        "random_signs": generate("random_signs", domain, seed=seed),
        "gaussian": generate("gaussian", domain, seed=seed),
        "smooth": generate("random_smooth", domain, seed=seed),
        "lognormal": generate("lognormal_weight", domain, seed=seed),
    }


def _le(a, b, tol):
    return a <= b + tol * max(1.0, abs(b))


@register("thm2.1")
def check_embedding(cfg: SuiteConfig):
    worst, witness = 0.0, None
    ratios = {}
    for s in range(cfg.samples):
        for n_cells in cfg.sizes[:2]:
            dom = _line(n_cells)
            fam = cfg.family(dom)
            f = generate("random_smooth", dom, seed=cfg.seed + s)
            for p in cfg.p_values:
                for lam in cfg.lam_values:
                    bar = seminorms.seminorm(f, SeminormSpec(p, lam, "barred", "radius"), fam)
                    mor = seminorms.seminorm(f, SeminormSpec(p, lam, "morrey", "radius"), fam)
                    r = bar.sup / (2**p * mor.sup) if mor.sup else 0.0
                    if r > worst:
                        worst, witness = r, {"seed": cfg.seed + s, "cells": n_cells, "p": p, "lambda": lam}
                    ratios.setdefault((s, p, lam), []).append(seminorms.variant_equivalence_ratio(mor, bar))
    drift = max(max(v) / min(v) for v in ratios.values()) if ratios else 1.0
    passed = worst <= 1 + cfg.tolerance and drift <= 2.0
    return passed, {"max_forward_ratio": worst, "max_reverse_drift": drift}, witness


@register("def3.5")
def check_def(cfg: SuiteConfig):
    tol = cfg.tolerance
    worst = {"campanato_over_2barred": 0.0, "neg_over_half_barred": 0.0, "barred_over_3absmean": 0.0}
    bad = None
    for n_cells in cfg.sizes[:1]:
        dom = _line(n_cells)
        fam = cfg.family(dom)
        for name, f in corpus(dom, cfg.seed).items():
            camp = seminorms.seminorm(f, SeminormSpec(1, 1, "campanato"), fam).sup
            bar = seminorms.seminorm(f, SeminormSpec(1, 1, "barred"), fam).sup
            amm = seminorms.seminorm(f, SeminormSpec(1, 1, "abs_minus_mean"), fam).sup
            neg = max(0.0, float(np.max(-f.samples)))
            ok = _le(camp, 2 * bar, tol) and _le(neg, 0.5 * bar, tol) and _le(bar, 3 * amm, tol)
            if bar > 0:
                worst["campanato_over_2barred"] = max(worst["campanato_over_2barred"], camp / (2 * bar))
                worst["neg_over_half_barred"] = max(worst["neg_over_half_barred"], neg / (0.5 * bar))
            if amm > 0:
                worst["barred_over_3absmean"] = max(worst["barred_over_3absmean"], bar / (3 * amm))
            if not ok and bad is None:
                bad = {"function": name, "cells": n_cells}
    return bad is None, worst, bad


@register("pc1")
def check_pc1(cfg: SuiteConfig):
    tol = cfg.tolerance
    lo_ratio, hi_ratio, bad = math.inf, 0.0, None
    dom = _line(cfg.sizes[0])
    fam = cfg.family(dom)
    for name, f in corpus(dom, cfg.seed).items():
        inf_ = seminorms.seminorm(f, SeminormSpec(1, 1, "inf_nonneg"), fam).sup
        bar = seminorms.seminorm(f, SeminormSpec(1, 1, "barred"), fam).sup
        if not (_le(inf_, bar, tol) and _le(bar, 2 * inf_, tol)) and bad is None:
            bad = {"function": name}
        if inf_ > 0:
            lo_ratio, hi_ratio = min(lo_ratio, bar / inf_), max(hi_ratio, bar / inf_)
    return bad is None, {"min_barred_over_inf": lo_ratio, "max_barred_over_inf": hi_ratio}, bad


def _log_profile(n_cells):
    dom = _line(n_cells)
    f = generate("log_singularity", dom)
    q0 = make_cube(dom, (0,), (n_cells,))
    return dom, f, q0


@register("jn3.1")
def check_jn(cfg: SuiteConfig):
    n_cells = max(cfg.sizes)
    dom, f, q0 = _log_profile(n_cells)
    ref = np.abs(f.values).mean()
    dev = GridFunction(dom, np.abs(f.values - ref))
    prof = czd.distribution(dev, q0)
    fit = czd.fit_exponential_decay(prof)
    gens = czd.jn_generations(f, q0, 1.0, cfg.tau, 4)
    inv = gens.check()
    bound = czd.constructive_bound(prof.thresholds, gens.scale, cfg.tau, 1, factor=2.0**3)
    bound_ok = bool(np.all(prof.fractions <= bound))
    expint = czd.exp_integrability(f, enumerate_cubes(dom, "dyadic"), fit.c2 / 2)
    passed = fit.c2 > 0 and fit.r2 >= 0.9 and bound_ok and inv["measure"] and inv["window"]
    measured = {"c1": fit.c1, "c2": fit.c2, "r2": fit.r2, "scale": gens.scale, "exp_integrability": expint,
                "off_generation": inv["off_generation"], "constructive_bound": bound_ok}
    return passed, measured, None if passed else {"cells": n_cells}


@register("jncp")
def check_jncp(cfg: SuiteConfig):
    p = 0.5
    dom, f, q0 = _log_profile(max(cfg.sizes))
    fam = enumerate_cubes(dom, "dyadic")
    norm = seminorms.seminorm(f, SeminormSpec(p, 1, "inf_nonneg"), fam).root
    ft = f * (1.0 / norm)
    worst = 0.0
    for cube in fam:
        if cube.count < 2:
            continue
        c = seminorms.minimizing_constant(ft, cube, p, "nonneg")
        dev = GridFunction(dom, np.abs(ft.values - c))
        prof = czd.distribution(dev, cube, np.geomspace(0.5, 20.0, 16))
        worst = max(worst, float(np.max(prof.fractions * prof.thresholds**p)))
    c = seminorms.minimizing_constant(ft, q0, p, "nonneg")
    fit = czd.fit_exponential_decay(czd.distribution(GridFunction(dom, np.abs(ft.values - c)), q0))
    passed = worst <= 1 + cfg.tolerance and fit.c2 > 0
    return passed, {"chebyshev_max": worst, "c2": fit.c2, "r2": fit.r2}, None


@register("jnm1")
def check_jnm1(cfg: SuiteConfig):
    dom, f, q0 = _log_profile(min(max(cfg.sizes), 256))
    out = {}
    passed = True
    for alpha in [0.0] + list(cfg.alpha_values):
        dev = maximal.maximal_deviation(f, q0, alpha)
        fit = czd.fit_exponential_decay(czd.distribution(dev))
        out[f"alpha={alpha:g}"] = {"c2": fit.c2, "r2": fit.r2}
        passed &= fit.c2 > 0
    return passed, out, None


@register("jnmalpha")
def check_sandwich(cfg: SuiteConfig):
    rng = np.random.default_rng(cfg.seed)
    dom = _line(16)
    fam = enumerate_cubes(dom, "anchored")
    worst = 0.0
    for _ in range(cfg.samples):
        f = GridFunction(dom, rng.normal(size=16))
        for alpha in cfg.alpha_values:
            for cube in fam:
                mq = maximal.local_maximal(f, cube, 0.0).values
                ma = maximal.local_maximal(f, cube, alpha).values * cube.measure ** (-alpha)
                avg = np.abs(f.values[cube.slices]).mean()
                worst = max(worst, float(np.max(avg - ma)), float(np.max(ma - mq)))
    return worst <= 1e-12, {"max_violation": worst}, None


@register("cmain")
def check_cmain(cfg: SuiteConfig):
    out, passed = {}, True
    for beta in cfg.beta_values:
        dom = _line(cfg.sizes[0])
        fam = cfg.family(dom)
        f = generate("power_cusp", dom, beta=beta)
        H = seminorms.holder_seminorm(f, beta).value
        bar = seminorms.seminorm(f, SeminormSpec(1, 1 + beta, "barred", "volume"), fam).sup
        inf_ = seminorms.seminorm(f, SeminormSpec(1, 1 + beta, "inf_nonneg", "radius"), fam).sup
        growth = []
        for n_cells in cfg.sizes:
            d2 = _line(n_cells)
            g = generate("power_cusp", d2, beta=beta)
            g = g - (float(np.max(g.samples)) + 1.0)
            growth.append(seminorms.seminorm(g, SeminormSpec(1, 1 + beta, "barred", "volume"), cfg.family(d2)).sup)
        grows = all(b > a * 1.2 for a, b in zip(growth, growth[1:]))
        ok = bar <= H * (1 + cfg.tolerance) and math.isfinite(inf_) and grows
        out[f"beta={beta:g}"] = {"barred": bar, "holder": H, "inf_nonneg": inf_, "negative_growth": growth}
        passed &= ok
    return passed, out, None


@register("mlip")
def check_mlip(cfg: SuiteConfig):
    out, passed = {}, True
    for beta in cfg.beta_values:
        ks = []
        for n_cells in cfg.sizes[:2]:
            dom = _line(n_cells)
            b = generate("power_cusp", dom, beta=beta)
            H = seminorms.holder_seminorm(b, beta).value
            st = maximal.char_statistic(b, enumerate_cubes(dom, "dyadic"), 0.0, beta, 1.0)
            ks.append(st.sup / H)
        ratio = max(ks) / min(ks) if min(ks) > 0 else math.inf
        out[f"beta={beta:g}"] = {"K": ks, "ratio": ratio}
        passed &= ratio <= 2.0
    return passed, out, None


@register("jnlip")
def check_jnlip(cfg: SuiteConfig):
    out, passed = {}, True
    for beta in cfg.beta_values:
        sups = []
        for n_cells in cfg.sizes[:2]:
            dom = _line(n_cells)
            f = generate("power_cusp", dom, beta=beta)
            H = seminorms.holder_seminorm(f, beta).value
            worst = 0.0
            for cube in enumerate_cubes(dom, "dyadic"):
                dev = maximal.maximal_deviation(f, cube, 0.0)
                worst = max(worst, float(np.max(np.abs(dev.values))) / cube.measure**beta)
            sups.append(worst / H)
        out[f"beta={beta:g}"] = sups
        passed &= all(math.isfinite(s) for s in sups) and max(sups) <= 2 * min(sups)
    return passed, out, None


@register("weighted5")
def check_weights(cfg: SuiteConfig):
    dom = _line(cfg.sizes[0])
    fam = cfg.family(dom)
    one = weights.Weight(dom, np.ones(dom.shape))
    unit = weights.muckenhoupt_constant(one, weights.WeightClass("Ap", 2.0), fam).value
    w = weights.Weight.of(generate("lognormal_weight", dom, seed=cfg.seed))
    a2 = weights.muckenhoupt_constant(w, weights.WeightClass("Ap", 2.0), fam).value
    b = generate("log_singularity", dom)
    dy = enumerate_cubes(dom, "dyadic")
    plain = maximal.char_statistic(b, dy, 0.0, 0.0, 2.0).sup
    weighted = weights.weighted_char_statistic(b, one, 2.0, 2.0, 0.0, dy).sup
    rel = abs(weighted - plain) / plain
    g = generate("gaussian", dom, seed=cfg.seed)
    B = weights.maximal_growth(g, fam)
    rdf = weights.rubio_de_francia(g, B, 16, fam)
    dominated = bool(np.all(np.abs(g.values) <= rdf.weight.values))
    mr = maximal.global_maximal(rdf.weight, fam).values
    a1_gap = float(np.max(mr - 2 * B * rdf.weight.values - rdf.tail))
    passed = unit == 1.0 and a2 >= 1.0 and rel <= 1e-12 and dominated and a2 < math.inf and a1_gap <= 1e-12
    measured = {"unit_A2": unit, "lognormal_A2": a2, "reduction_rel_err": rel, "B": B,
                "rdf_tail": rdf.tail, "rdf_A1_gap": a1_gap, "dominates": dominated}
    return passed, measured, None


@register("bilinear6")
def check_bilinear(cfg: SuiteConfig):
    rng = np.random.default_rng(cfg.seed)
    dom = _line(32)
    q = make_cube(dom, (8,), (24,))
    fam = enumerate_cubes(dom, "anchored", base=q)
    chi = indicator(dom, q)
    unit = maximal.bilinear_maximal(chi, chi, fam).values
    worst = float(np.max(np.abs(unit - 1.0)))
    for _ in range(cfg.samples):
        b1, b2 = GridFunction(dom, rng.normal(size=32)), GridFunction(dom, rng.normal(size=32))
        lhs = maximal.bilinear_commutator(b1, b2, chi, chi, fam).values
        rhs = (b1.values[q.slices] + b2.values[q.slices]
               - maximal.local_maximal(b1, q).values - maximal.local_maximal(b2, q).values)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    f = generate("gaussian", dom, seed=cfg.seed)
    full = enumerate_cubes(dom, "anchored")
    tilde = seminorms.seminorm(f, SeminormSpec(1, 1, "tilde"), full).sup
    barred_neg = seminorms.seminorm(-f, SeminormSpec(1, 1, "barred"), full).sup
    tilde_err = abs(tilde - barred_neg)
    passed = worst <= 1e-12 and tilde_err <= cfg.tolerance * max(1.0, barred_neg)
    return passed, {"identity_max_error": worst, "tilde_vs_barred_neg": tilde_err}, None


def run_suite(config: SuiteConfig) -> list:
    """Run the configured checks in order. Unknown tags fail before any work."""
    unknown = [t for t in config.checks if t not in REGISTRY]
    if unknown:
        raise GridError(f"unknown check tags: {unknown}; known: {sorted(REGISTRY)}")
    results = []
    for tag in config.checks:
        start = time.perf_counter()
        passed, measured, witness = REGISTRY[tag](config)
        results.append(CheckResult(tag, bool(passed), _plain(measured), config.tolerance, _plain(witness),
                                   time.perf_counter() - start))
    return results


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


CSV_FIELDS = ("tag", "passed", "tolerance", "measured", "witness")


def report_text(results, fmt: str = "json", timings: bool = False) -> str:
    if fmt == "json":
        return json.dumps({"results": [r.as_dict(timings) for r in results]}, indent=2, allow_nan=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        cols = CSV_FIELDS + (("runtime",) if timings else ())
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in results:
            d = r.as_dict(timings)
            w.writerow([json.dumps(d[c]) if c in ("measured", "witness") else d[c] for c in cols])
        return buf.getvalue()
    raise GridError(f"unknown report format {fmt!r}")


def emit_report(results, path, fmt: str | None = None, timings: bool = False) -> Path:
    """Write results as JSON or CSV; runtimes are left out unless ``timings``
    so that a fixed config and seed give byte-identical files."""
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report_text(results, fmt, timings))
    return path


def load_report(path) -> list:
    path = Path(path)
    if path.suffix == ".csv":
        rows = list(csv.DictReader(path.read_text().splitlines()))
        return [
            CheckResult(r["tag"], r["passed"] == "True", json.loads(r["measured"]), float(r["tolerance"]),
                        json.loads(r["witness"]))
            for r in rows
        ]
    data = json.loads(path.read_text())
    return [CheckResult(d["tag"], d["passed"], d["measured"], d["tolerance"], d["witness"], d.get("runtime", 0.0))
            for d in data["results"]]
