"""Exterior Helmholtz scattering by sound-soft and impedance obstacles.

The scattered field is represented as

    u^s(x) = int [dPhi(x, y)/dnu(y) a(y) - Phi(x, y) b(y)] ds(y)

with two boundary densities ``a`` and ``b`` whose meaning depends on the
formulation:

* Dirichlet: indirect combined-field potential, ``a = psi``,
  ``b = i*eta_c*psi`` with coupling ``eta_c = k``. The density solves
  ``(I + K - i eta_c S) psi = -2 u^i``.
* Impedance: direct Burton-Miller formulation on the total boundary
  field ``u``; ``a = u`` and ``b = du/dnu = -i k eta u``.

Both are free of spurious interior resonances.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, GeometryError, NearBoundaryError, SingularSystemError
from .geometry import ParametricCurve, check_disjoint, distance_to_curves, inside_any, quadrature_size
from .nystrom import BoundaryMesh, assemble_operators, interpolation_operator
from .specfun import (
    MAX_ORDER,
    bessel_j_orders,
    fundamental_solution,
    fundamental_solution_gradient,
    hankel1_01,
    hankel1_orders,
)

RCOND_LIMIT = 1e-13
FAR_FIELD_FACTOR_PHASE = np.exp(0.25j * np.pi)


def far_field_constant(k):
    """gamma = e^{i pi/4} / sqrt(8 pi k)."""
    return FAR_FIELD_FACTOR_PHASE / np.sqrt(8 * np.pi * k)


# ---------------------------------------------------------------- incident waves


@dataclass(frozen=True)
class PointSource:
    """Outgoing point source Phi(x, x_s)."""

    position: tuple

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))

    def values(self, k, x):
        return fundamental_solution(k, x, np.asarray(self.position))

    def gradients(self, k, x):
        # grad_x Phi(x, x_s) is the gradient of Phi(x_s, .) in its second slot
        return fundamental_solution_gradient(k, np.asarray(self.position), x)


@dataclass(frozen=True)
class PlaneWave:
    """amplitude * exp(i k x.d). ``amplitude`` is a scaling hook for tests."""

    direction: tuple
    amplitude: complex = 1.0

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (2,) or abs(np.hypot(*d) - 1.0) > 1e-12:
            raise DomainError("plane-wave direction must be a unit 2-vector")
        object.__setattr__(self, "direction", (float(d[0]), float(d[1])))

    @classmethod
    def from_angle(cls, angle, amplitude=1.0):
        return cls((np.cos(angle), np.sin(angle)), amplitude)

    def values(self, k, x):
        x = np.asarray(x, dtype=float)
        return self.amplitude * np.exp(1j * k * (x @ np.asarray(self.direction)))

    def gradients(self, k, x):
        return (1j * k * self.values(k, x))[..., None] * np.asarray(self.direction)


@dataclass(frozen=True)
class StandingWave:
    """Regular wave Im Phi(x, z) = J_0(k|x - z|)/4 centred at ``center``.

    Drives the scattering problem behind the theoretical resolution image.
    """

    center: tuple

    def values(self, k, x):
        r = np.hypot(*(np.asarray(x, dtype=float) - np.asarray(self.center)).T)
        return 0.25 * bessel_j_orders(0, k * r)[0] + 0j

    def gradients(self, k, x):
        diff = np.asarray(x, dtype=float) - np.asarray(self.center)
        r = np.hypot(diff[..., 0], diff[..., 1])
        j1 = bessel_j_orders(1, k * r)[1]
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(r > 0, -0.25 * k * j1 / r, 0.0)
        return (scale[..., None] * diff) + 0j


def _incident_on_mesh(incident, k, mesh):
    u = incident.values(k, mesh.points)
    du = np.sum(incident.gradients(k, mesh.points) * mesh.normals, axis=-1)
    return u, du


def _check_source(incident, curves):
    if isinstance(incident, PointSource) and curves:
        if inside_any(curves, np.asarray(incident.position)[None, :]).any():
            raise GeometryError("point source lies inside an obstacle")


# ---------------------------------------------------------- boundary conditions


@dataclass(frozen=True)
class ImpedanceProfile:
    """Piecewise-constant impedance eta(theta) along one curve.

    ``segments`` holds ``(start, stop, value)`` triples on [0, 2pi); theta
    outside every segment takes ``default``.
    """

    default: float = 0.0
    segments: tuple = ()

    def __post_init__(self):
        vals = [self.default] + [s[2] for s in self.segments]
        if not all(np.isfinite(v) and v >= 0 for v in vals):
            raise DomainError("impedance must be finite and non-negative")
        object.__setattr__(self, "segments", tuple(tuple(map(float, s)) for s in self.segments))

    @classmethod
    def constant(cls, value):
        return cls(float(value))

    @classmethod
    def coerce(cls, spec):
        """Accept a number, an ImpedanceProfile or a list of segment dicts."""
        if isinstance(spec, ImpedanceProfile):
            return spec
        if np.isscalar(spec):
            return cls.constant(spec)
        segs = tuple((s["from"], s["to"], s["value"]) for s in spec)
        return cls(0.0, segs)

    def __call__(self, theta):
        theta = np.mod(np.asarray(theta, dtype=float), 2 * np.pi)
        out = np.full(theta.shape, float(self.default))
        for start, stop, value in self.segments:
            out[(theta >= start) & (theta < stop)] = value
        return out

    def describe(self):
        if not self.segments:
            return repr(float(self.default))
        return "[" + ",".join(f"{a!r}:{b!r}={v!r}" for a, b, v in self.segments) + "]"


@dataclass(frozen=True)
class Dirichlet:
    kind: str = field(default="dirichlet", init=False)

    def describe(self):
        return "dirichlet"


@dataclass(frozen=True)
class Impedance:
    """Impedance condition du/dnu + i k eta u = 0; one profile per curve or one for all."""

    eta: tuple
    kind: str = field(default="impedance", init=False)

    def __post_init__(self):
        eta = self.eta
        if np.isscalar(eta) or isinstance(eta, ImpedanceProfile):
            eta = (eta,)
        object.__setattr__(self, "eta", tuple(ImpedanceProfile.coerce(e) for e in eta))

    def profile(self, p):
        return self.eta[0] if len(self.eta) == 1 else self.eta[p]

    def nodal_values(self, mesh):
        if len(self.eta) not in (1, len(mesh.curves)):
            raise DomainError("need one impedance profile per curve")
        parts = [self.profile(p)(mesh.theta[sl]) for p, sl in enumerate(mesh.slices())]
        return np.concatenate(parts) if parts else np.zeros(0)

    def describe(self):
        return "impedance(" + ";".join(e.describe() for e in self.eta) + ")"


# ---------------------------------------------------------------- the solver


@dataclass(frozen=True)
class BoundarySolution:
    """Boundary data of one solved scattering problem.

    ``trace`` and ``dtrace`` are the scattered field and its normal derivative
    on the nodes; ``layer_dl``/``layer_sl`` are the representation densities.
    """

    mesh: BoundaryMesh
    k: float
    bc: object
    incident: object
    formulation: str
    coupling: complex
    density: np.ndarray
    layer_dl: np.ndarray
    layer_sl: np.ndarray
    trace: np.ndarray
    dtrace: np.ndarray

    @property
    def curves(self):
        return self.mesh.curves

    @property
    def theta(self):
        return self.mesh.theta

    @property
    def points(self):
        return self.mesh.points

    @property
    def weights(self):
        return self.mesh.weights


class ScatteringSystem:
    """Assembled and LU-factored boundary system for one geometry, k and bc.

    Re-used across many right-hand sides (sources, probe points).
    """

    def __init__(self, curves, k, bc, sizes=None, min_per_wavelength=10.0):
        if not k > 0:
            raise DomainError("wavenumber must be positive")
        curves = list(curves)
        for c in curves:
            if not isinstance(c, ParametricCurve):
                raise TypeError("curves must be ParametricCurve instances")
        check_disjoint(curves)
        if sizes is None:
            sizes = [quadrature_size(c, k, min_per_wavelength) for c in curves]
        self.k = float(k)
        self.bc = bc
        self.mesh = BoundaryMesh.build(curves, sizes)
        n = self.mesh.size
        if n == 0:
            self.ops = None
            self.lu = None
            return
        self.ops = assemble_operators(self.mesh, self.k)
        eye = np.eye(n)
        ops, k = self.ops, self.k
        if bc.kind == "dirichlet":
            self.formulation = "combined-field"
            self.coupling = complex(k)
            A = eye + ops.K - 1j * self.coupling * ops.S
        elif bc.kind == "impedance":
            self.formulation = "burton-miller"
            self.coupling = 1j / k
            lam = bc.nodal_values(self.mesh)
            self.eta_nodes = lam
            ikl = 1j * k * lam
            A = (eye - ops.K - ops.S * ikl[None, :]) + self.coupling * (
                -np.diag(ikl) - ops.Kp * ikl[None, :] - ops.T
            )
        else:
            raise DomainError(f"unknown boundary condition {bc!r}")
        self.matrix = A
        self.lu = sla.lu_factor(A, check_finite=True)
        anorm = np.linalg.norm(A, 1)
        rcond, info = sla.lapack.zgecon(self.lu[0], anorm, norm="1")
        if info != 0 or not rcond > RCOND_LIMIT:
            raise SingularSystemError(f"boundary system is numerically singular (rcond={rcond:.2e})")
        self.rcond = float(rcond)

    def solve_traces(self, u_inc, du_inc):
        """Densities and scattered traces for incident data on the nodes.

        Columns of ``u_inc``/``du_inc`` are independent right-hand sides.
        Returns ``(density, a, b, trace, dtrace)``.
        """
        ops, k = self.ops, self.k
        if self.bc.kind == "dirichlet":
            psi = sla.lu_solve(self.lu, -2.0 * u_inc)
            a = psi
            b = 1j * self.coupling * psi
            trace = -u_inc
            dtrace = 0.5 * (ops.T @ psi - 1j * self.coupling * (ops.Kp @ psi - psi))
            return psi, a, b, trace, dtrace
        u = sla.lu_solve(self.lu, 2.0 * u_inc + 2.0 * self.coupling * du_inc)
        lam = self.eta_nodes if u.ndim == 1 else self.eta_nodes[:, None]
        du = -1j * k * lam * u
        return u, u, du, u - u_inc, du - du_inc

    def solve(self, incident):
        _check_source(incident, self.mesh.curves)
        if self.mesh.size == 0:
            z = np.zeros(0, dtype=complex)
            return BoundarySolution(self.mesh, self.k, self.bc, incident, "none", 0j, z, z, z, z, z)
        u_inc, du_inc = _incident_on_mesh(incident, self.k, self.mesh)
        parts = self.solve_traces(u_inc, du_inc)
        return BoundarySolution(
            self.mesh, self.k, self.bc, incident, self.formulation, self.coupling, *parts
        )


def solve_dirichlet(curves, k, incident, sizes=None):
    """Sound-soft scattering of ``incident`` by the obstacles bounded by ``curves``."""
    return ScatteringSystem(curves, k, Dirichlet(), sizes).solve(incident)


def solve_impedance(curves, k, incident, eta, sizes=None):
    """Impedance scattering; ``eta`` is a number, a profile, or one per curve."""
    bc = eta if isinstance(eta, Impedance) else Impedance(eta)
    return ScatteringSystem(curves, k, bc, sizes).solve(incident)


def solve(curves, k, incident, bc, sizes=None):
    return ScatteringSystem(curves, k, bc, sizes).solve(incident)


# ------------------------------------------------------------- evaluation


def layer_evaluation_matrices(mesh, k, points, upsample=1):
    """Matrices ``(E_dl, E_sl)`` with u^s = E_dl @ a - E_sl @ b at ``points``.

    Densities are trigonometrically upsampled by ``upsample`` before the
    trapezoidal rule, which keeps accuracy near the boundary.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    fine = mesh if upsample == 1 else mesh.refined(upsample)
    diff = points[:, None, :] - fine.points[None, :, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    h0, h1 = hankel1_01(k * r)
    w = fine.weights[None, :]
    proj = np.sum(diff * fine.normals[None, :, :], axis=-1)
    e_dl = w * 0.25j * k * h1 / r * proj
    e_sl = w * 0.25j * h0
    if upsample != 1:
        U = interpolation_operator(mesh, upsample)
        e_dl = e_dl @ U
        e_sl = e_sl @ U
    return e_dl, e_sl


def _check_exterior(sol, pts):
    curves = sol.mesh.curves
    if not curves:
        return
    if inside_any(curves, pts).any():
        raise NearBoundaryError("evaluation point inside an obstacle")
    for p, curve in enumerate(curves):
        if (distance_to_curves([curve], pts) < 2 * sol.mesh.node_spacing(p)).any():
            raise NearBoundaryError("evaluation point within two node spacings of the boundary")


def evaluate_scattered(sol, x, upsample=4, chunk=2048):
    """Scattered field at one point (scalar) or an (M, 2) array of points."""
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if sol.mesh.size == 0:
        out = np.zeros(len(pts), dtype=complex)
        return out[0] if single else out
    _check_exterior(sol, pts)
    out = np.empty(len(pts), dtype=complex)
    for start in range(0, len(pts), chunk):
        sl = slice(start, start + chunk)
        e_dl, e_sl = layer_evaluation_matrices(sol.mesh, sol.k, pts[sl], upsample)
        out[sl] = e_dl @ sol.layer_dl - e_sl @ sol.layer_sl
    return out[0] if single else out


def evaluate_far_field(sol, xhat):
    """Far-field pattern from the scattered boundary trace and normal derivative.

    w_inf(xhat) = gamma * int [w(y) d/dnu(y) e^{-ik xhat.y}
                              - dw/dnu(y) e^{-ik xhat.y}] ds(y)
    with gamma = e^{i pi/4}/sqrt(8 pi k). Accepts one direction or (M, 2).
    """
    d = np.asarray(xhat, dtype=float)
    single = d.ndim == 1
    d = np.atleast_2d(d)
    if np.any(np.abs(np.hypot(d[:, 0], d[:, 1]) - 1.0) > 1e-10):
        raise DomainError("far-field direction must be a unit vector")
    fd, ft = far_field_operators(sol.mesh, sol.k, d)
    out = fd @ sol.dtrace + ft @ sol.trace
    return out[0] if single else out


def far_field_operators(mesh, k, directions):
    """Matrices ``(F_d, F_t)`` with w_inf = F_d @ dtrace + F_t @ trace."""
    phase = np.exp(-1j * k * directions @ mesh.points.T)
    dn = -1j * k * directions @ mesh.normals.T
    w = mesh.weights[None, :] * far_field_constant(k)
    return -w * phase, w * dn * phase


def boundary_residual(sol, refine=2):
    """Boundary-condition residual of the represented field at off-node points.

    The densities are interpolated to a ``refine``-times finer Nyström grid
    (whose odd-indexed nodes lie between the solve nodes), the exterior traces
    of the representation are recomputed there with freshly assembled
    operators, and the condition is evaluated on the total field. Returns
    ``(residual, incident_scale)`` arrays on the fine nodes, where the scale is
    |u^i| for Dirichlet and |du^i/dnu| for impedance.
    """
    mesh = sol.mesh
    fine = mesh.refined(refine)
    U = interpolation_operator(mesh, refine)
    a = U @ sol.layer_dl
    b = U @ sol.layer_sl
    ops = assemble_operators(fine, sol.k)
    trace = 0.5 * (a + ops.K @ a) - 0.5 * (ops.S @ b)
    dtrace = 0.5 * (ops.T @ a) - 0.5 * (ops.Kp @ b - b)
    u_inc, du_inc = _incident_on_mesh(sol.incident, sol.k, fine)
    if sol.bc.kind == "dirichlet":
        return trace + u_inc, np.abs(u_inc)
    lam = sol.bc.nodal_values(fine)
    res = (dtrace + du_inc) + 1j * sol.k * lam * (trace + u_inc)
    return res, np.abs(du_inc)


def energy_identity(sol, n_directions=512):
    """(flux, far-field energy): -Im int w conj(dw/dnu) ds and k int |w_inf|^2."""
    flux = -np.imag(np.sum(sol.weights * sol.trace * np.conj(sol.dtrace)))
    ang = 2 * np.pi * np.arange(n_directions) / n_directions
    far = evaluate_far_field(sol, np.stack([np.cos(ang), np.sin(ang)], -1))
    return float(flux), float(sol.k * 2 * np.pi / n_directions * np.sum(np.abs(far) ** 2))


# ------------------------------------------------------------ disk oracle


def disk_terms(a, k):
    return int(np.ceil(3 * k * a)) + 40


def _disk_coefficients(a, k, bc, n_terms, max_order):
    if bc.kind == "dirichlet":
        j = bessel_j_orders(n_terms, k * a, max_order)
        h = hankel1_orders(n_terms, k * a, max_order)
        return -j / h
    eta = bc.profile(0)
    if eta.segments:
        raise DomainError("disk oracle needs a constant impedance")
    eta = float(eta.default)
    j = bessel_j_orders(n_terms + 1, k * a, max_order + 1)
    h = hankel1_orders(n_terms + 1, k * a, max_order + 1)
    jp = np.empty(n_terms + 1)
    hp = np.empty(n_terms + 1, dtype=complex)
    jp[0], hp[0] = -j[1], -h[1]
    jp[1:] = 0.5 * (j[:-2] - j[2:])
    hp[1:] = 0.5 * (h[:-2] - h[2:])
    j, h = j[:-1], h[:-1]
    return -(jp + 1j * eta * j) / (hp + 1j * eta * h)


def _incident_expansion(incident, k, n_terms, max_order):
    """(c_n, angle) with u^i = sum_{n>=0} eps_n c_n J_n(kr) cos(n(theta - angle))."""
    n = np.arange(n_terms + 1)
    if isinstance(incident, PlaneWave):
        angle = np.arctan2(incident.direction[1], incident.direction[0])
        return incident.amplitude * (1j ** (n % 4)), angle
    if isinstance(incident, PointSource):
        rho = np.hypot(*incident.position)
        angle = np.arctan2(incident.position[1], incident.position[0])
        return 0.25j * hankel1_orders(n_terms, k * rho, max_order), angle
    raise DomainError("disk oracle supports plane waves and point sources")


def disk_series(a, k, incident, x, bc, n_terms=None, max_order=MAX_ORDER, tail_tol=1e-13):
    """Scattered field of the disk |x| < a by separation of variables.

    ``x`` is one point or an (M, 2) array of exterior points. A point source
    must lie outside ``x`` radially (|x_s| > |x| not required; only |x_s| > a).
    """
    n_terms = disk_terms(a, k) if n_terms is None else int(n_terms)
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    r = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(r < a * (1 - 1e-12)):
        raise DomainError("disk series evaluated inside the disk")
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    b = _disk_coefficients(a, k, bc, n_terms, max_order)
    c, angle = _incident_expansion(incident, k, n_terms, max_order)
    eps = np.where(np.arange(n_terms + 1) == 0, 1.0, 2.0)
    coef = eps * c * b
    H = hankel1_orders(n_terms, k * r, max_order)
    terms = coef[:, None] * H * np.cos(np.outer(np.arange(n_terms + 1), theta - angle))
    tail = np.max(np.abs(terms[-1]))
    if tail > tail_tol * max(1.0, float(np.max(np.abs(terms.sum(0))))):
        warnings.warn(f"disk series tail term {tail:.1e} exceeds {tail_tol:.0e}", RuntimeWarning)
    out = terms.sum(axis=0)
    return out[0] if single else out


def disk_far_field(a, k, incident, xhat, bc, n_terms=None, max_order=MAX_ORDER):
    """Far-field pattern of the disk series."""
    n_terms = disk_terms(a, k) if n_terms is None else int(n_terms)
    d = np.atleast_2d(np.asarray(xhat, dtype=float))
    theta = np.arctan2(d[:, 1], d[:, 0])
    b = _disk_coefficients(a, k, bc, n_terms, max_order)
    c, angle = _incident_expansion(incident, k, n_terms, max_order)
    n = np.arange(n_terms + 1)
    eps = np.where(n == 0, 1.0, 2.0)
    coef = eps * c * b * (-1j) ** (n % 4)
    out = np.sqrt(2 / (np.pi * k)) * np.exp(-0.25j * np.pi) * (
        coef[:, None] * np.cos(np.outer(n, theta - angle))
    ).sum(0)
    return out[0] if np.ndim(xhat) == 1 else out
