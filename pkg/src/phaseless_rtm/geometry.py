"""Obstacle boundaries, transducer arrays and imaging grids."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import GeometryError

CURVE_KINDS = ("circle", "kite", "p_leaf", "peanut", "rounded_square")


def _canonical_jet(kind, radius, p, amplitude, theta):
    """Point, first and second theta-derivative of the untransformed curve."""
    c, s = np.cos(theta), np.sin(theta)
    if kind == "circle":
        x = radius * np.stack([c, s], -1)
        dx = radius * np.stack([-s, c], -1)
        ddx = -x
    elif kind == "kite":
        c2, s2 = np.cos(2 * theta), np.sin(2 * theta)
        x = np.stack([c + 0.65 * c2 - 0.65, 1.5 * s], -1)
        dx = np.stack([-s - 1.3 * s2, 1.5 * c], -1)
        ddx = np.stack([-c - 2.6 * c2, -1.5 * s], -1)
    elif kind == "p_leaf":
        cp, sp = np.cos(p * theta), np.sin(p * theta)
        r = 1.0 + amplitude * cp
        dr = -amplitude * p * sp
        ddr = -amplitude * p * p * cp
        x = np.stack([r * c, r * s], -1)
        dx = np.stack([dr * c - r * s, dr * s + r * c], -1)
        ddx = np.stack(
            [ddr * c - 2 * dr * s - r * c, ddr * s + 2 * dr * c - r * s], -1
        )
    elif kind == "peanut":
        c3, s3 = np.cos(3 * theta), np.sin(3 * theta)
        x = np.stack([c + 0.2 * c3, s + 0.2 * s3], -1)
        dx = np.stack([-s - 0.6 * s3, c + 0.6 * c3], -1)
        ddx = np.stack([-c - 1.8 * c3, -s - 1.8 * s3], -1)
    elif kind == "rounded_square":
        x = np.stack([c**3 + c, s**3 + s], -1)
        dx = np.stack([-3 * c * c * s - s, 3 * s * s * c + c], -1)
        ddx = np.stack(
            [6 * c * s * s - 3 * c**3 - c, 6 * s * c * c - 3 * s**3 - s], -1
        )
    else:
        raise GeometryError(f"unknown curve kind {kind!r}")
    return x, dx, ddx


@dataclass(frozen=True)
class ParametricCurve:
    """Closed, counterclockwise obstacle boundary x(theta), theta in [0, 2pi].

    The canonical shape is rotated by ``rotation`` radians about the origin
    and then translated by ``center``.
    """

    kind: str
    radius: float = 1.0
    p: int = 5
    amplitude: float = 0.2
    center: tuple[float, float] = (0.0, 0.0)
    rotation: float = 0.0

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise GeometryError(f"unknown curve kind {self.kind!r}")
        if self.kind == "circle" and not self.radius > 0:
            raise GeometryError("circle radius must be positive")
        if self.kind == "p_leaf":
            if int(self.p) != self.p or self.p < 2:
                raise GeometryError("p-leaf needs an integer p >= 2")
            if not 0 <= self.amplitude < 1:
                raise GeometryError("p-leaf amplitude must lie in [0, 1)")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @classmethod
    def circle(cls, radius=1.0, center=(0.0, 0.0)):
        return cls("circle", radius=radius, center=center)

    @classmethod
    def kite(cls, center=(0.0, 0.0), rotation=0.0):
        return cls("kite", center=center, rotation=rotation)

    @classmethod
    def p_leaf(cls, p=5, amplitude=0.2, center=(0.0, 0.0), rotation=0.0):
        return cls("p_leaf", p=p, amplitude=amplitude, center=center, rotation=rotation)

    @classmethod
    def peanut(cls, center=(0.0, 0.0), rotation=0.0):
        return cls("peanut", center=center, rotation=rotation)

    @classmethod
    def rounded_square(cls, center=(0.0, 0.0), rotation=0.0):
        return cls("rounded_square", center=center, rotation=rotation)

    def _rotate(self, v):
        if self.rotation == 0.0:
            return v
        cr, sr = math.cos(self.rotation), math.sin(self.rotation)
        return np.stack([cr * v[..., 0] - sr * v[..., 1], sr * v[..., 0] + cr * v[..., 1]], -1)

    def jet(self, theta):
        theta = np.asarray(theta, dtype=float)
        x, dx, ddx = _canonical_jet(self.kind, self.radius, self.p, self.amplitude, theta)
        return (
            self._rotate(x) + np.asarray(self.center),
            self._rotate(dx),
            self._rotate(ddx),
        )

    def point(self, theta):
        return self.jet(theta)[0]

    def normal(self, theta):
        _, dx, _ = self.jet(theta)
        speed = np.hypot(dx[..., 0], dx[..., 1])
        if np.any(speed < 1e-12):
            raise GeometryError("degenerate tangent: |x'(theta)| vanishes")
        return np.stack([dx[..., 1], -dx[..., 0]], -1) / speed[..., None]

    def length(self, n=1024):
        theta = 2 * np.pi * np.arange(n) / n
        dx = self.jet(theta)[1]
        return 2 * np.pi / n * float(np.sum(np.hypot(dx[..., 0], dx[..., 1])))

    def polygon(self, n=2048):
        return self.point(2 * np.pi * np.arange(n) / n)

    def contains(self, points, n=2048):
        """Even-odd test against a dense polygonal approximation."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        poly = self.polygon(n)
        x0, y0 = poly[:, 0], poly[:, 1]
        x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
        px = pts[:, 0][:, None]
        py = pts[:, 1][:, None]
        straddle = (y0 > py) != (y1 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
        inside = np.count_nonzero(straddle & (px < xcross), axis=1) % 2 == 1
        return inside

    def max_radius(self):
        return float(np.max(np.hypot(*self.polygon(1024).T)))

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind == "circle":
            out["radius"] = self.radius
        if self.kind == "p_leaf":
            out["p"] = int(self.p)
            out["amplitude"] = self.amplitude
        out["center"] = list(self.center)
        out["rotation"] = self.rotation
        return out


def curve_point(curve, theta):
    return curve.point(theta)


def curve_jet(curve, theta):
    return curve.jet(theta)


def outward_normal(curve, theta):
    return curve.normal(theta)


def distance_to_curves(curves, points, n=4096):
    """Distance from each point to the union of the curves (dense sampling)."""
    samples = np.concatenate([c.polygon(n) for c in curves])
    dist, _ = cKDTree(samples).query(np.asarray(points, dtype=float))
    return dist


def check_disjoint(curves):
    for i, a in enumerate(curves):
        for b in curves[i + 1:]:
            if a.contains(b.polygon(512)).any() or b.contains(a.polygon(512)).any():
                raise GeometryError("obstacle boundaries overlap")


def inside_any(curves, points):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    mask = np.zeros(len(pts), dtype=bool)
    for c in curves:
        mask |= c.contains(pts)
    return mask


@dataclass(frozen=True)
class SurveyGeometry:
    """Sources on a circle of radius R_s and receivers on a circle of radius R_r.

    Source s sits at angle ``2 pi s / N_s + source_offset`` and receiver r at
    ``2 pi r / N_r + receiver_offset`` (0-based indices); the receiver offset
    defaults to ``pi / N_r`` so that no receiver coincides with a source.
    """

    R_s: float
    N_s: int
    R_r: float
    N_r: int
    receiver_offset: float | None = None
    source_offset: float = 0.0

    def __post_init__(self):
        if not (self.R_s > 0 and self.R_r > 0):
            raise GeometryError("array radii must be positive")
        if int(self.N_s) != self.N_s or int(self.N_r) != self.N_r or self.N_s < 1 or self.N_r < 1:
            raise GeometryError("array sizes must be positive integers")
        object.__setattr__(self, "N_s", int(self.N_s))
        object.__setattr__(self, "N_r", int(self.N_r))
        if self.receiver_offset is None:
            object.__setattr__(self, "receiver_offset", math.pi / self.N_r)
        if self.R_r < self.R_s:
            warnings.warn(
                f"R_r={self.R_r} < R_s={self.R_s}: outside the analysed regime R_r >= R_s",
                stacklevel=2,
            )
        gap = np.min(
            np.hypot(*(self.receivers()[:, None, :] - self.sources()[None, :, :]).transpose(2, 0, 1))
        )
        if gap < 1e-9 * max(self.R_s, self.R_r):
            raise GeometryError("a receiver coincides with a source")

    @property
    def tau(self):
        return self.R_r / self.R_s

    def source_angles(self):
        return 2 * np.pi * np.arange(self.N_s) / self.N_s + self.source_offset

    def receiver_angles(self):
        return 2 * np.pi * np.arange(self.N_r) / self.N_r + self.receiver_offset

    def sources(self):
        a = self.source_angles()
        return self.R_s * np.stack([np.cos(a), np.sin(a)], -1)

    def receivers(self):
        a = self.receiver_angles()
        return self.R_r * np.stack([np.cos(a), np.sin(a)], -1)

    def to_dict(self):
        return {
            "R_s": self.R_s,
            "N_s": self.N_s,
            "R_r": self.R_r,
            "N_r": self.N_r,
            "receiver_offset": self.receiver_offset,
            "source_offset": self.source_offset,
        }


def place_sources(survey):
    return survey.sources()


def place_receivers(survey):
    return survey.receivers()


@dataclass
class ImageGrid:
    """Uniform rectangular sampling grid; ``values`` has shape (ny, nx)."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int
    values: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny or self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 nodes per axis")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("grid bounds must satisfy max > min")
        self.nx, self.ny = int(self.nx), int(self.ny)
        if self.values is None:
            self.values = np.zeros((self.ny, self.nx))
        else:
            self.values = np.asarray(self.values, dtype=float).reshape(self.ny, self.nx)

    @property
    def xs(self):
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ys(self):
        return np.linspace(self.y_min, self.y_max, self.ny)

    @property
    def spacing(self):
        return (
            (self.x_max - self.x_min) / (self.nx - 1),
            (self.y_max - self.y_min) / (self.ny - 1),
        )

    @property
    def bounds(self):
        return (self.x_min, self.x_max, self.y_min, self.y_max)

    def node(self, i, j):
        """Coordinates of node (i, j): i indexes x, j indexes y."""
        return np.array([self.xs[i], self.ys[j]])

    def points(self):
        """All nodes as an (ny*nx, 2) array, row-major with y outer."""
        gx, gy = np.meshgrid(self.xs, self.ys)
        return np.stack([gx.ravel(), gy.ravel()], -1)

    def same_shape(self, other):
        return (self.nx, self.ny) == (other.nx, other.ny) and np.allclose(
            self.bounds, other.bounds, rtol=0, atol=0
        )

    def with_values(self, values):
        return ImageGrid(*self.bounds, self.nx, self.ny, values=values)


def build_grid(x_min, x_max, y_min, y_max, nx, ny):
    return ImageGrid(x_min, x_max, y_min, y_max, nx, ny)


def quadrature_size(curve, k, min_per_wavelength=10.0):
    """Smallest even node count >= 32 giving the requested points per wavelength."""
    if not k > 0:
        raise ValueError("wavenumber must be positive")
    needed = min_per_wavelength * curve.length(1024) * k / (2 * np.pi)
    n = max(32, math.ceil(needed))
    return n + (n % 2)
