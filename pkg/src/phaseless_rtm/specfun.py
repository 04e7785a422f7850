"""Integer-order cylinder functions and the 2D Helmholtz fundamental solution.

Everything here is written from scratch on top of numpy; no external
special-function library is used. All functions accept scalars or arrays
and are vectorised over the argument.

Algorithms
----------
* ``t <= 20``: Miller's downward recurrence for J_n, normalised with
  ``J_0 + 2 sum J_2k = 1``. Y_0 and Y_1 follow from the Neumann series in
  the same J_n values, so no power-series cancellation is incurred.
* ``t > 20``: Hankel's asymptotic expansion for orders 0 and 1 (the
  truncation error there is below 1e-16). Higher J_n come from Miller's
  recurrence rescaled onto the asymptotic J_0, J_1.
* Y_n for ``n >= 2`` by upward recurrence, which is stable for Y.

Error measure: relative error where the function is non-oscillatory
(``t <= n``); for ``t > n`` the error is measured against the local
amplitude ``|H_n^(1)(t)|`` because J_n and Y_n have zeros there.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, SingularityError

EULER_GAMMA = 0.57721566490153286061
MAX_ORDER = 120
ASYMPTOTIC_THRESHOLD = 20.0
SINGULAR_DISTANCE = 1e-14

_RESCALE_AT = 1e250


def _check_order(n, max_order):
    if int(n) != n or n < 0:
        raise DomainError(f"order must be a non-negative integer, got {n!r}")
    if n > max_order:
        raise DomainError(f"order {n} exceeds the configured maximum {max_order}")
    return int(n)


def _as_argument(t, allow_zero):
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError("argument contains NaN")
    if allow_zero:
        if np.any(arr < 0):
            raise DomainError("argument must be >= 0")
    elif np.any(arr <= 0):
        raise DomainError("argument must be > 0")
    return arr


def _unwrap(arr, scalar):
    return arr[()] if scalar else arr


def _miller_start(nmax, tmax):
    m = int(np.ceil(max(nmax, tmax) + 20.0 + 12.0 * tmax ** (1.0 / 3.0)))
    return m + (m % 2)


def _miller(nmax, t):
    """Unnormalised downward recurrence.

    Returns ``(b, norm, y0_sum, y1_sum)`` where ``b[m] / norm`` is J_m(t)
    for m <= nmax and the two sums feed the Neumann series of Y_0, Y_1.
    ``t`` must be a 1-D array of positive values.
    """
    start = _miller_start(nmax, float(t.max()))
    out = np.zeros((nmax + 1, t.size))
    b_hi = np.zeros_like(t)
    b = np.ones_like(t)
    norm = np.zeros_like(t)
    y0_sum = np.zeros_like(t)
    y1_sum = np.zeros_like(t)
    two_over_t = 2.0 / t
    for m in range(start, 0, -1):
        if m <= nmax:
            out[m] = b
        if m % 2 == 0:
            half = m // 2
            norm += 2.0 * b
            y0_sum += (b / half) if half % 2 == 0 else (-b / half)
        elif m >= 3:
            half = (m - 1) // 2
            c = (2 * half + 1) / (half * (half + 1))
            y1_sum += (c * b) if half % 2 == 0 else (-c * b)
        b_hi, b = b, (m * two_over_t) * b - b_hi
        big = np.abs(b) > _RESCALE_AT
        if big.any():
            f = np.where(big, 1.0 / _RESCALE_AT, 1.0)
            b *= f
            b_hi *= f
            norm *= f
            y0_sum *= f
            y1_sum *= f
            out[m:] *= f
    out[0] = b
    norm += b
    return out, norm, y0_sum, y1_sum


def _hankel_asymptotic(t, nu):
    """H_nu^(1)(t) for nu in {0, 1} and t > 20 from Hankel's expansion."""
    mu = 4.0 * nu * nu
    p = np.ones_like(t)
    q = np.zeros_like(t)
    coef = 1.0
    power = np.ones_like(t)
    inv_t = 1.0 / t
    last = np.inf
    for k in range(1, 60):
        coef *= (mu - (2 * k - 1) ** 2) / (8.0 * k)
        power = power * inv_t
        term = coef * power
        sign = 1.0 if (k // 2) % 2 == 0 else -1.0
        if k % 2:
            q += sign * term
        else:
            p += sign * term
        size = float(np.max(np.abs(term)))
        if size < 1e-17 or size > last:
            break
        last = size
    c = np.cos(t)
    s = np.sin(t)
    # exp(i(t - nu*pi/2 - pi/4)) expanded so only cos(t), sin(t) of the exact
    # double argument are needed.
    if nu == 0:
        phase = (c + s) + 1j * (s - c)
    else:
        phase = (s - c) - 1j * (s + c)
    return np.sqrt(1.0 / (np.pi * t)) * (p + 1j * q) * phase


def _j01_y01(t):
    """J_0, J_1, Y_0, Y_1 on a 1-D array of positive arguments."""
    j0 = np.empty_like(t)
    j1 = np.empty_like(t)
    y0 = np.empty_like(t)
    y1 = np.empty_like(t)
    small = t <= ASYMPTOTIC_THRESHOLD
    if small.any():
        ts = t[small]
        b, norm, s0, s1 = _miller(1, ts)
        a0 = b[0] / norm
        a1 = b[1] / norm
        lg = np.log(ts / 2.0) + EULER_GAMMA
        j0[small] = a0
        j1[small] = a1
        y0[small] = (2.0 / np.pi) * (lg * a0 - 2.0 * s0 / norm)
        y1[small] = (2.0 / np.pi) * ((lg - 1.0) * a1 - a0 / ts - s1 / norm)
    large = ~small
    if large.any():
        tl = t[large]
        h0 = _hankel_asymptotic(tl, 0)
        h1 = _hankel_asymptotic(tl, 1)
        j0[large] = h0.real
        j1[large] = h1.real
        y0[large] = h0.imag
        y1[large] = h1.imag
    return j0, j1, y0, y1


def _j_orders_positive(nmax, t):
    j0, j1, _, _ = _j01_y01(t)
    out = np.empty((nmax + 1, t.size))
    out[0] = j0
    if nmax >= 1:
        out[1] = j1
    if nmax < 2:
        return out
    small = t <= ASYMPTOTIC_THRESHOLD
    if small.any():
        b, norm, _, _ = _miller(nmax, t[small])
        out[2:, small] = b[2:] / norm
    large = ~small
    if large.any():
        tl = t[large]
        b, _, _, _ = _miller(nmax, tl)
        # least-squares fit of the recurrence onto (J_0, J_1); never both small
        size = np.maximum(np.abs(b[0]), np.abs(b[1]))
        u0 = b[0] / size
        u1 = b[1] / size
        scale = (j0[large] * u0 + j1[large] * u1) / (u0 * u0 + u1 * u1)
        out[2:, large] = (b[2:] / size) * scale
    return out


def _y_orders_positive(nmax, t):
    _, _, y0, y1 = _j01_y01(t)
    out = np.empty((nmax + 1, t.size))
    out[0] = y0
    if nmax >= 1:
        out[1] = y1
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, nmax):
            nxt = (2.0 * n / t) * out[n] - out[n - 1]
            out[n + 1] = np.where(np.isfinite(out[n]), nxt, -np.inf)
    return out


def bessel_j_orders(nmax, t, max_order=MAX_ORDER):
    """J_0(t), ..., J_nmax(t) stacked along a new leading axis."""
    nmax = _check_order(nmax, max_order)
    arr = _as_argument(t, allow_zero=True)
    flat = arr.ravel()
    out = np.zeros((nmax + 1, flat.size))
    pos = flat > 0
    if pos.any():
        out[:, pos] = _j_orders_positive(nmax, flat[pos])
    out[0, ~pos] = 1.0
    return out.reshape((nmax + 1,) + arr.shape)


def bessel_y_orders(nmax, t, max_order=MAX_ORDER):
    """Y_0(t), ..., Y_nmax(t); overflowing high orders at tiny t give -inf."""
    nmax = _check_order(nmax, max_order)
    arr = _as_argument(t, allow_zero=False)
    out = _y_orders_positive(nmax, arr.ravel())
    return out.reshape((nmax + 1,) + arr.shape)


def hankel1_orders(nmax, t, max_order=MAX_ORDER):
    """H^(1)_0(t), ..., H^(1)_nmax(t) = J_n + i Y_n."""
    nmax = _check_order(nmax, max_order)
    arr = _as_argument(t, allow_zero=False)
    flat = arr.ravel()
    h = _j_orders_positive(nmax, flat) + 1j * _y_orders_positive(nmax, flat)
    return h.reshape((nmax + 1,) + arr.shape)


def bessel_j(n, t, max_order=MAX_ORDER):
    """Bessel function of the first kind J_n(t), t >= 0."""
    n = _check_order(n, max_order)
    scalar = np.ndim(t) == 0
    return _unwrap(bessel_j_orders(n, t, max_order)[n], scalar)


def bessel_y(n, t, max_order=MAX_ORDER):
    """Bessel function of the second kind Y_n(t), t > 0."""
    n = _check_order(n, max_order)
    scalar = np.ndim(t) == 0
    return _unwrap(bessel_y_orders(n, t, max_order)[n], scalar)


def hankel1(n, t, max_order=MAX_ORDER):
    """Hankel function of the first kind H^(1)_n(t) = J_n(t) + i Y_n(t)."""
    n = _check_order(n, max_order)
    scalar = np.ndim(t) == 0
    return _unwrap(hankel1_orders(n, t, max_order)[n], scalar)


def hankel1_01(t):
    """(H^(1)_0(t), H^(1)_1(t)) for an array of positive arguments.

    Fast path used by the integral-operator and imaging kernels.
    """
    arr = _as_argument(t, allow_zero=False)
    j0, j1, y0, y1 = _j01_y01(arr.ravel())
    return (j0 + 1j * y0).reshape(arr.shape), (j1 + 1j * y1).reshape(arr.shape)


def _separation(x, y):
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    if diff.shape[-1:] != (2,):
        raise ValueError("points must have a trailing dimension of size 2")
    r = np.hypot(diff[..., 0], diff[..., 1])
    if np.any(r < SINGULAR_DISTANCE):
        raise SingularityError("fundamental solution evaluated at its source point")
    return diff, r


def fundamental_solution(k, x, y):
    """Phi(x, y) = (i/4) H^(1)_0(k|x - y|), broadcast over leading axes."""
    if k <= 0:
        raise DomainError("wavenumber must be positive")
    _, r = _separation(x, y)
    h0, _ = hankel1_01(k * r)
    out = 0.25j * h0
    return _unwrap(out, out.ndim == 0)


def fundamental_solution_gradient(k, x, y):
    """Gradient of Phi(x, y) with respect to y, shape ``(..., 2)``.

    grad_y Phi = (ik/4) H^(1)_1(k|x - y|) (x - y) / |x - y|.
    """
    if k <= 0:
        raise DomainError("wavenumber must be positive")
    diff, r = _separation(x, y)
    _, h1 = hankel1_01(k * r)
    return (0.25j * k * h1 / r)[..., None] * diff
