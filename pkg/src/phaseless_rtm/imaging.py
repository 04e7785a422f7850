"""Reverse-time-migration imaging from phaseless (and full-phase) survey data.

The imaging functional at a sampling point z is

    I(z) = -k^2 Im{ c * sum_s sum_r Phi(z, x_s) Phi(x_r, z) Delta(x_r, x_s) },
    c = (2 pi)^2 R_s R_r / (N_s N_r),

with the corrected data

    Delta = (|u|^2 - |u^i|^2) / u^i

for phaseless data, or Delta = conj(u^s) for the full-phase baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .dataset import ScatteringDataset, incident_matrix
from .errors import GridMismatchError, MissingPhaseError, SingularityError
from .forward import Dirichlet, ScatteringSystem, StandingWave, far_field_operators
from .geometry import ImageGrid
from .specfun import hankel1_01

SINGULAR_INCIDENT = 1e-14
THEORY_DIRECTIONS = 512


@dataclass(frozen=True)
class CorrectedData:
    """Corrected data Delta(x_r, x_s), shape (N_r, N_s)."""

    delta: np.ndarray
    survey: object
    k: float

    def __post_init__(self):
        d = np.asarray(self.delta, dtype=complex)
        if d.shape != (self.survey.N_r, self.survey.N_s):
            raise ValueError("corrected data do not match the survey")
        if not np.all(np.isfinite(d)):
            raise ValueError("corrected data contain non-finite entries")
        object.__setattr__(self, "delta", d)


@dataclass
class RtmImage:
    """An image on a grid plus a little provenance."""

    grid: ImageGrid
    variant: str
    k: object = None
    survey: object = None
    provenance: dict = field(default_factory=dict)

    @property
    def values(self):
        return self.grid.values

    def normalized(self):
        peak = np.max(np.abs(self.values))
        return self.values / peak if peak > 0 else self.values.copy()


def corrected_data(dataset):
    """Delta = (|u|^2 - |u^i|^2) / u^i from magnitudes and the known incident field."""
    u_inc = incident_matrix(dataset.survey, dataset.k)
    if np.any(np.abs(u_inc) < SINGULAR_INCIDENT):
        raise SingularityError("incident field vanishes at a source/receiver pair")
    mag = dataset.magnitude
    delta = (mag * mag - np.abs(u_inc) ** 2) / u_inc
    return CorrectedData(delta, dataset.survey, dataset.k)


def _require_phase(dataset):
    if dataset.total is None:
        raise MissingPhaseError("full-phase imaging needs the complex total field")
    return dataset.total - incident_matrix(dataset.survey, dataset.k)


def fullphase_data(dataset):
    """Delta replaced by conj(u^s) for the classical RTM baseline."""
    return CorrectedData(np.conj(_require_phase(dataset)), dataset.survey, dataset.k)


def correction_data(dataset):
    """The two remainder terms |u^s|^2/u^i and u^s conj(u^i)/u^i of Delta."""
    us = _require_phase(dataset)
    ui = incident_matrix(dataset.survey, dataset.k)
    return (
        CorrectedData(np.abs(us) ** 2 / ui, dataset.survey, dataset.k),
        CorrectedData(us * np.conj(ui) / ui, dataset.survey, dataset.k),
    )


def _green_to_points(k, centers, points):
    """Phi(points, centers) as an (M, n) array."""
    diff = points[:, None, :] - centers[None, :, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    if np.any(r < 1e-14):
        raise SingularityError("sampling point coincides with a transducer")
    return 0.25j * hankel1_01(k * r)[0]


def backpropagate(data, z, s):
    """v_b(z, x_s) = -(2 pi R_r / N_r) sum_r Phi(x_r, z) Delta(x_r, x_s).

    ``z`` is one point or an (M, 2) array; ``s`` a 0-based source index.
    """
    sv = data.survey
    pts = np.atleast_2d(np.asarray(z, dtype=float))
    green = _green_to_points(data.k, sv.receivers(), pts)
    out = -(2 * np.pi * sv.R_r / sv.N_r) * (green @ data.delta[:, s])
    return out[0] if np.ndim(z) == 1 else out


def cross_correlate(data, z, vb):
    """Imaging value from back-propagated fields ``vb`` of shape (M, N_s).

    I = k^2 Im{(2 pi R_s / N_s) sum_s u^i(z, x_s) v_b(z, x_s)}; combined with
    :func:`backpropagate` this equals the double-sum functional.
    """
    sv = data.survey
    pts = np.atleast_2d(np.asarray(z, dtype=float))
    green = _green_to_points(data.k, sv.sources(), pts)
    acc = np.sum(green * np.atleast_2d(vb), axis=1)
    out = data.k**2 * np.imag((2 * np.pi * sv.R_s / sv.N_s) * acc)
    return out[0] if np.ndim(z) == 1 else out


@numba.njit(cache=True)
def _double_sum(src_green, rec_green, deltas, out):
    # fixed order per node: sources outer, receivers inner
    n_pts, n_src = src_green.shape
    n_rec = rec_green.shape[1]
    n_data = deltas.shape[0]
    for m in range(n_pts):
        for l in range(n_data):
            acc = 0j
            for s in range(n_src):
                inner = 0j
                for r in range(n_rec):
                    inner += rec_green[m, r] * deltas[l, r, s]
                acc += src_green[m, s] * inner
            out[l, m] = acc


def imaging_values(survey, k, deltas, points, chunk=2048):
    """I(z) at ``points`` for one or several corrected-data matrices.

    ``deltas`` has shape (N_r, N_s) or (L, N_r, N_s); the result has shape
    (M,) or (L, M) accordingly. Green's function tables are shared between
    the L data sets.
    """
    deltas = np.asarray(deltas, dtype=complex)
    single = deltas.ndim == 2
    deltas = np.ascontiguousarray(deltas[None] if single else deltas)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    xs, xr = survey.sources(), survey.receivers()
    const = (2 * np.pi) ** 2 * survey.R_s * survey.R_r / (survey.N_s * survey.N_r)
    sums = np.empty((deltas.shape[0], len(pts)), dtype=complex)
    for start in range(0, len(pts), chunk):
        sl = slice(start, start + chunk)
        a = np.ascontiguousarray(_green_to_points(k, xs, pts[sl]))
        b = np.ascontiguousarray(_green_to_points(k, xr, pts[sl]))
        out = np.empty((deltas.shape[0], a.shape[0]), dtype=complex)
        _double_sum(a, b, deltas, out)
        sums[:, sl] = out
    values = -(k**2) * np.imag(const * sums)
    return values[0] if single else values


def _image(grid, values, variant, k, survey, **meta):
    return RtmImage(grid.with_values(values.reshape(grid.ny, grid.nx)), variant, k, survey, meta)


def rtm_image_phaseless(data, grid):
    """Phaseless RTM image of corrected data (or of a dataset) on ``grid``."""
    if isinstance(data, ScatteringDataset):
        data = corrected_data(data)
    vals = imaging_values(data.survey, data.k, data.delta, grid.points())
    return _image(grid, vals, "phaseless", data.k, data.survey)


def rtm_image_fullphase(dataset, grid):
    """Classical RTM image with Delta replaced by conj(u^s)."""
    data = fullphase_data(dataset)
    vals = imaging_values(data.survey, data.k, data.delta, grid.points())
    return _image(grid, vals, "fullphase", data.k, data.survey)


def decomposition_images(dataset, grid):
    """Phaseless, full-phase and the two correction images from one pass.

    Returns a dict with keys ``phaseless``, ``fullphase``, ``quadratic`` and
    ``cross``; phaseless = fullphase + quadratic + cross up to rounding.
    """
    phaseless = corrected_data(dataset)
    full = fullphase_data(dataset)
    quad, cross = correction_data(dataset)
    stack = np.stack([phaseless.delta, full.delta, quad.delta, cross.delta])
    vals = imaging_values(dataset.survey, dataset.k, stack, grid.points())
    names = ("phaseless", "fullphase", "quadratic", "cross")
    return {n: _image(grid, v, n, dataset.k, dataset.survey) for n, v in zip(names, vals)}


def theoretical_image(curves, bc, k, z, n_directions=THEORY_DIRECTIONS, sizes=None, min_per_wavelength=10.0):
    """Resolution-analysis image  k int |psi_inf(xhat, z)|^2 dxhat.

    psi is the radiating solution with boundary data -Im Phi(., z) (it is the
    field scattered by the regular wave Im Phi(., z)). For impedance obstacles
    the boundary term k int eta |psi + Im Phi|^2 ds is added. ``z`` may be one
    point or an (M, 2) array; all probes share one factorisation.
    """
    bc = Dirichlet() if bc is None else bc
    pts = np.atleast_2d(np.asarray(z, dtype=float))
    system = ScatteringSystem(list(curves), k, bc, sizes, min_per_wavelength)
    mesh = system.mesh
    ang = 2 * np.pi * np.arange(n_directions) / n_directions
    fd, ft = far_field_operators(mesh, k, np.stack([np.cos(ang), np.sin(ang)], -1))
    u_inc = np.empty((mesh.size, len(pts)), dtype=complex)
    du_inc = np.empty_like(u_inc)
    for j, p in enumerate(pts):
        wave = StandingWave(tuple(p))
        u_inc[:, j] = wave.values(k, mesh.points)
        du_inc[:, j] = np.sum(wave.gradients(k, mesh.points) * mesh.normals, axis=-1)
    _, _, _, trace, dtrace = system.solve_traces(u_inc, du_inc)
    far = fd @ dtrace + ft @ trace
    out = k * (2 * np.pi / n_directions) * np.sum(np.abs(far) ** 2, axis=0)
    if bc.kind == "impedance":
        eta = bc.nodal_values(mesh)
        out += k * np.sum((mesh.weights * eta)[:, None] * np.abs(trace + u_inc) ** 2, axis=0)
    return out[0] if np.ndim(z) == 1 else out


def multifrequency_stack(images):
    """Mean of max-normalised images that share one grid."""
    images = list(images)
    if not images:
        raise ValueError("need at least one image")
    first = images[0].grid
    for im in images[1:]:
        if not first.same_shape(im.grid):
            raise GridMismatchError("images live on different grids")
    acc = np.zeros_like(first.values)
    for im in images:
        acc += im.normalized()
    ks = tuple(im.k for im in images)
    return RtmImage(first.with_values(acc / len(images)), "stack", ks, images[0].survey)


# ------------------------------------------------------------------ file output


def _fmt(v):
    return format(float(v), ".17g")


def write_image_csv(image, path):
    """``x,y,value`` rows, y outer, 17 significant digits."""
    grid = image.grid
    pts = grid.points()
    vals = grid.values.ravel()
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("x,y,value\n")
        for (x, y), v in zip(pts, vals):
            fh.write(f"{_fmt(x)},{_fmt(y)},{_fmt(v)}\n")


def read_image_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    grid = ImageGrid(xs[0], xs[-1], ys[0], ys[-1], len(xs), len(ys), data[:, 2])
    return RtmImage(grid, "ingested")


def write_image_pgm(image, path, levels=65535):
    """ASCII greyscale map of [min, max] onto [0, levels].

    The first pixel row is the top of the image (largest y).
    """
    vals = image.grid.values
    lo, hi = float(vals.min()), float(vals.max())
    span = hi - lo
    scaled = np.zeros(vals.shape, dtype=np.int64) if span == 0 else np.rint(
        (vals - lo) / span * levels
    ).astype(np.int64)
    rows = scaled[::-1]
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("P2\n")
        fh.write(f"# min={_fmt(lo)} max={_fmt(hi)}\n")
        fh.write(f"{vals.shape[1]} {vals.shape[0]}\n{levels}\n")
        for row in rows:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")
