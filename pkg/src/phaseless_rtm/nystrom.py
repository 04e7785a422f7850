"""Nyström discretisation of the 2D Helmholtz boundary operators.

Operators use the factor-2 convention on closed curves::

    (S f)(x)  = 2 int Phi(x, y) f(y) ds(y)
    (K f)(x)  = 2 int dPhi(x, y)/dnu(y) f(y) ds(y)
    (K' f)(x) = 2 int dPhi(x, y)/dnu(x) f(y) ds(y)
    (T f)(x)  = 2 d/dnu(x) int dPhi(x, y)/dnu(y) f(y) ds(y)

so the exterior traces of the layer potentials are
``SL = S/2``, ``DL = (I + K)/2``, ``d_nu SL = (K' - I)/2``, ``d_nu DL = T/2``.

Self-interaction blocks split off the logarithmic part of the kernel and
integrate it with Kress' trigonometric product weights; interactions
between different curves are smooth and use the trapezoidal rule. The
hypersingular T goes through Maue's identity
``T f = d/ds S(df/ds) + k^2 nu . S(nu f)`` with spectral differentiation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .specfun import EULER_GAMMA, hankel1_01


@dataclass(frozen=True)
class BoundaryMesh:
    """Equispaced parameter nodes on one or more closed curves, concatenated."""

    curves: tuple
    sizes: tuple
    theta: np.ndarray
    points: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    speed: np.ndarray
    normals: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, curves, sizes):
        curves = tuple(curves)
        sizes = tuple(int(n) for n in sizes)
        if len(curves) != len(sizes):
            raise ValueError("one node count per curve is required")
        if any(n % 2 or n < 4 for n in sizes):
            raise ValueError("node counts must be even and >= 4")
        thetas, pts, d1s, d2s, wts = [], [], [], [], []
        for curve, n in zip(curves, sizes):
            t = 2 * np.pi * np.arange(n) / n
            x, dx, ddx = curve.jet(t)
            thetas.append(t)
            pts.append(x)
            d1s.append(dx)
            d2s.append(ddx)
            wts.append(np.full(n, 2 * np.pi / n))
        if curves:
            d1 = np.concatenate(d1s)
            speed = np.hypot(d1[:, 0], d1[:, 1])
            normals = np.stack([d1[:, 1], -d1[:, 0]], -1) / speed[:, None]
            return cls(
                curves,
                sizes,
                np.concatenate(thetas),
                np.concatenate(pts),
                d1,
                np.concatenate(d2s),
                speed,
                normals,
                np.concatenate(wts) * speed,
            )
        empty = np.zeros((0, 2))
        return cls((), (), np.zeros(0), empty, empty, empty, np.zeros(0), empty, np.zeros(0))

    @property
    def size(self):
        return int(sum(self.sizes))

    def slices(self):
        start = 0
        for n in self.sizes:
            yield slice(start, start + n)
            start += n

    def curve_slice(self, p):
        return list(self.slices())[p]

    def node_spacing(self, p):
        sl = self.curve_slice(p)
        return float(self.speed[sl].max() * 2 * np.pi / self.sizes[p])

    def refined(self, factor):
        return BoundaryMesh.build(self.curves, [n * factor for n in self.sizes])


def kress_weights(n_nodes):
    """Circulant weights R_j for  int_0^2pi ln(4 sin^2((t - s)/2)) f(s) ds.

    Entry ``j`` is the weight of node ``t_j = 2 pi j / N`` relative to a
    target node at 0.
    """
    n = n_nodes // 2
    delta = 2 * np.pi * np.arange(n_nodes) / n_nodes
    m = np.arange(1, n)
    w = -(2 * np.pi / n) * (np.cos(np.outer(delta, m)) / m).sum(axis=1)
    return w - (np.pi / n**2) * np.cos(n * delta)


def _circulant(first_col):
    n = first_col.size
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return first_col[idx]


def differentiation_matrix(n_nodes):
    """Spectral d/dt on N equispaced nodes of [0, 2pi), N even."""
    h = 2 * np.pi / n_nodes
    j = np.arange(1, n_nodes)
    col = np.zeros(n_nodes)
    col[1:] = 0.5 * (-1.0) ** j / np.tan(j * h / 2)
    return _circulant(col)


def trig_interpolation_matrix(n_nodes, factor):
    """Matrix mapping N periodic samples to their trigonometric interpolant
    sampled on ``factor * N`` equispaced nodes."""
    if factor == 1:
        return np.eye(n_nodes)
    m = n_nodes * factor
    coeffs = np.fft.fft(np.eye(n_nodes), axis=0)
    padded = np.zeros((m, n_nodes), dtype=complex)
    half = n_nodes // 2
    padded[:half] = coeffs[:half]
    padded[m - half + 1:] = coeffs[half + 1:]
    # split the Nyquist mode symmetrically so real data stay real
    padded[half] = 0.5 * coeffs[half]
    padded[m - half] = 0.5 * coeffs[half]
    return np.fft.ifft(padded, axis=0).real * factor


def interpolation_operator(mesh, factor):
    """Block-diagonal trigonometric upsampling for every curve of ``mesh``."""
    n = mesh.size
    out = np.zeros((n * factor, n))
    row = 0
    for sl, size in zip(mesh.slices(), mesh.sizes):
        out[row:row + size * factor, sl] = trig_interpolation_matrix(size, factor)
        row += size * factor
    return out


@dataclass
class LayerOperators:
    S: np.ndarray
    K: np.ndarray
    Kp: np.ndarray
    T: np.ndarray


def _pair_geometry(mesh, sp, sq):
    diff = mesh.points[sp][:, None, :] - mesh.points[sq][None, :, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    d1q = mesh.d1[sq]
    # (x(t) - x(tau)) . (|x'(tau)| nu(tau)),  (x(t) - x(tau)) . nu(t)
    g = diff[..., 0] * d1q[None, :, 1] - diff[..., 1] * d1q[None, :, 0]
    nup = mesh.normals[sp]
    gp = diff[..., 0] * nup[:, None, 0] + diff[..., 1] * nup[:, None, 1]
    return r, g, gp


def assemble_operators(mesh, k):
    """Dense Nyström matrices of S, K, K' and T acting on nodal values."""
    n = mesh.size
    S = np.zeros((n, n), dtype=complex)
    K = np.zeros((n, n), dtype=complex)
    Kp = np.zeros((n, n), dtype=complex)
    slices = list(mesh.slices())
    for p, sp in enumerate(slices):
        for q, sq in enumerate(slices):
            r, g, gp = _pair_geometry(mesh, sp, sq)
            speed_q = mesh.speed[sq][None, :]
            nq = mesh.sizes[q]
            if p != q:
                h0, h1 = hankel1_01(k * r)
                w = 2 * np.pi / nq
                S[sp, sq] = w * 0.5j * h0 * speed_q
                K[sp, sq] = w * 0.5j * k * h1 / r * g
                Kp[sp, sq] = -w * 0.5j * k * h1 / r * gp * speed_q
                continue
            S[sp, sq], K[sp, sq], Kp[sp, sq] = _self_block(mesh, sp, k, r, g, gp)
    D = np.zeros((n, n))
    for sl, size in zip(slices, mesh.sizes):
        D[sl, sl] = differentiation_matrix(size)
    inv_speed = 1.0 / mesh.speed
    nu1, nu2 = mesh.normals[:, 0], mesh.normals[:, 1]
    T = (inv_speed[:, None] * D) @ (S * inv_speed[None, :]) @ D
    T += k * k * (nu1[:, None] * S * nu1[None, :] + nu2[:, None] * S * nu2[None, :])
    return LayerOperators(S, K, Kp, T)


def _self_block(mesh, sl, k, r, g, gp):
    nn = r.shape[0]
    half = nn // 2
    speed = mesh.speed[sl]
    d1, d2 = mesh.d1[sl], mesh.d2[sl]
    diag = np.arange(nn)
    r_safe = r.copy()
    r_safe[diag, diag] = 1.0
    h0, h1 = hankel1_01(k * r_safe)
    j0, j1 = h0.real, h1.real

    t = mesh.theta[sl]
    log_term = np.log(4 * np.sin((t[:, None] - t[None, :]) / 2) ** 2 + np.eye(nn))
    log_term[diag, diag] = 0.0
    R = _circulant(kress_weights(nn))
    trap = np.pi / half

    curvature = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    kd_diag = -curvature / (2 * np.pi * speed**2)

    s_full = 0.5j * h0 * speed[None, :]
    s1 = -j0 * speed[None, :] / (2 * np.pi)
    s2 = s_full - s1 * log_term
    s1[diag, diag] = -speed / (2 * np.pi)
    s2[diag, diag] = (0.5j - EULER_GAMMA / np.pi - np.log(k * speed / 2) / np.pi) * speed

    k_full = 0.5j * k * h1 / r_safe * g
    k1 = -(k / (2 * np.pi)) * j1 / r_safe * g
    k2 = k_full - k1 * log_term
    k1[diag, diag] = 0.0
    k2[diag, diag] = kd_diag

    kp_full = -0.5j * k * h1 / r_safe * gp * speed[None, :]
    kp1 = (k / (2 * np.pi)) * j1 / r_safe * gp * speed[None, :]
    kp2 = kp_full - kp1 * log_term
    kp1[diag, diag] = 0.0
    kp2[diag, diag] = kd_diag

    return (
        R * s1 + trap * s2,
        R * k1 + trap * k2,
        R * kp1 + trap * kp2,
    )
