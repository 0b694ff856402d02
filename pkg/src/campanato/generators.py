"""Canonical sampled test functions."""
from __future__ import annotations

import numpy as np

from .grid import Domain, GridError, GridFunction

KINDS = (
    "constant",
    "step",
    "power_cusp",
    "log_singularity",
    "random_signs",
    "gaussian",
    "random_smooth",
    "lognormal_weight",
)


def _distance(domain: Domain, center) -> np.ndarray:
    x = domain.coords()
    if center is None:
        center = [l + s / 2 for l, s in zip(domain.lower, domain.side)]
    c = np.asarray(center, dtype=float).reshape(domain.n)
    return np.sqrt(np.sum((x - c) ** 2, axis=-1))


def generate(kind: str, domain: Domain | None = None, seed: int = 0, **params) -> GridFunction:
    """Sample a canonical function on ``domain`` (default: unit interval, 256 cells).

    Singular kernels are clamped by adding half a cell width to the distance,
    ``log(1 / (|x - x0| + h/2))``. ``sign`` multiplies and ``shift`` is added
    afterwards for every kind.
    """
    if domain is None:
        domain = Domain(1, 1.0, 256)
    if min(domain.resolution) < 2:
        raise GridError("resolution must be >= 2")
    rng = np.random.default_rng(seed)
    center = params.get("center")
    if kind == "constant":
        v = np.full(domain.shape, float(params.get("c", 1.0)))
    elif kind == "step":
        lo, hi = float(params.get("low", -1.0)), float(params.get("high", 1.0))
        x = domain.coords()[..., 0]
        mid = domain.lower[0] + domain.side[0] / 2 if center is None else float(np.ravel(center)[0])
        v = np.where(x < mid, lo, hi)
    elif kind == "power_cusp":
        beta = float(params.get("beta", 0.5))
        if not 0 < beta <= 1:
            raise GridError("power_cusp needs beta in (0, 1]")
        v = _distance(domain, center) ** beta
    elif kind == "log_singularity":
        v = np.log(1.0 / (_distance(domain, center) + 0.5 * domain.width))
    elif kind == "random_signs":
        v = rng.choice([-1.0, 1.0], size=domain.shape)
    elif kind == "gaussian":
        v = rng.normal(size=domain.shape)
    elif kind == "random_smooth":
        # seeded trigonometric polynomial on the box: refinements sample the same function
        modes = int(params.get("modes", 6))
        x = (domain.coords() - np.asarray(domain.lower)) / np.asarray(domain.side)
        v = np.full(domain.shape, rng.uniform(-1.0, 1.0))
        for _ in range(modes):
            k = rng.integers(1, modes + 1, size=domain.n)
            phase = rng.uniform(0, 2 * np.pi)
            amp = rng.normal() / np.linalg.norm(k)
            v = v + amp * np.cos(2 * np.pi * (x @ k) + phase)
    elif kind == "lognormal_weight":
        v = np.exp(float(params.get("sigma", 0.5)) * rng.normal(size=domain.shape))
    else:
        raise GridError(f"unknown generator kind {kind!r}")
    v = float(params.get("sign", 1.0)) * v + float(params.get("shift", 0.0))
    return GridFunction(domain, v)


def indicator(domain: Domain, cube) -> GridFunction:
    """``chi_Q`` on the active cells."""
    v = np.zeros(domain.shape)
    v[cube.slices] = 1.0
    return GridFunction(domain, v)
