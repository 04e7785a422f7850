"""Additive Gaussian noise on magnitude data and the associated norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def noise_generator(seed, *stream):
    """Counter-based Philox generator keyed by ``seed`` and optional stream ids."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, stream)])))


def standard_normal_polar(rng, n):
    """``n`` standard-normal variates by Marsaglia's polar method.

    Uniform pairs are drawn in batches from ``rng``; accepted pairs yield two
    variates each, in draw order.
    """
    out = np.empty(n)
    filled = 0
    while filled < n:
        pairs = (n - filled) // 2 + 16
        pairs = int(pairs / 0.78) + 1
        u = 2.0 * rng.random((pairs, 2)) - 1.0
        s = u[:, 0] ** 2 + u[:, 1] ** 2
        ok = (s > 0.0) & (s < 1.0)
        u, s = u[ok], s[ok]
        z = (u * np.sqrt(-2.0 * np.log(s) / s)[:, None]).ravel()
        take = min(n - filled, z.size)
        out[filled:filled + take] = z[:take]
        filled += take
    return out


def noise_sigma(magnitude, mu):
    return float(mu) * float(np.max(np.abs(magnitude)))


def add_noise(magnitude, mu, rng):
    """|u| + sigma * eps with sigma = mu * max|u| and eps ~ N(0, 1) row-major.

    Negative results are kept as they are.
    """
    if mu < 0:
        raise ValueError("noise level must be non-negative")
    mag = np.asarray(magnitude, dtype=float)
    if mu == 0:
        return mag.copy()
    eps = standard_normal_polar(rng, mag.size).reshape(mag.shape)
    return mag + noise_sigma(mag, mu) * eps


@dataclass(frozen=True)
class NoiseReport:
    mu: float
    sigma: float
    data_norm: float
    noise_norm: float

    def row(self):
        return f"{self.mu:<6g} {self.sigma:.6f} {self.data_norm:.6f} {self.noise_norm:.6f}"


def noise_metrics(clean, noisy, mu):
    """sigma, ||u|| and ||noise|| with the mean-square norms over all pairs."""
    clean = np.asarray(clean, dtype=float)
    noisy = np.asarray(noisy, dtype=float)
    if clean.shape != noisy.shape:
        raise ValueError("clean and noisy data differ in shape")
    return NoiseReport(
        float(mu),
        noise_sigma(clean, mu),
        float(np.sqrt(np.mean(clean**2))),
        float(np.sqrt(np.mean((noisy - clean) ** 2))),
    )


def format_noise_table(reports):
    lines = ["mu     sigma    ||u||    ||noise||"]
    lines += [r.row() for r in reports]
    return "\n".join(lines) + "\n"
