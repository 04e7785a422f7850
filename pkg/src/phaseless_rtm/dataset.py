"""Multi-static survey data: synthesis and the plain-text exchange format.

File layout::

    format_version=1
    k=<float>
    R_s=..., R_r=..., N_s=..., N_r=..., receiver_offset=...
    has_phase=0|1
    bc=<description>
    obstacles=<JSON list>
    ---
    r s re im        (has_phase=1)   or   r s mag   (has_phase=0)

Records are receiver-major (r outer, s inner), indices 0-based, numbers
written with 17 significant digits so they round-trip exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetFormatError, GeometryError
from .forward import Dirichlet, ScatteringSystem, layer_evaluation_matrices
from .geometry import ParametricCurve, SurveyGeometry, inside_any
from .specfun import fundamental_solution, fundamental_solution_gradient

FORMAT_VERSION = 1
_HEADER_KEYS = ("format_version", "k", "R_s", "R_r", "N_s", "N_r", "receiver_offset",
                "has_phase", "bc", "obstacles")


@dataclass(frozen=True)
class ScatteringDataset:
    """Receiver-by-source total-field data; ``magnitude[r, s] = |u(x_r, x_s)|``."""

    survey: SurveyGeometry
    k: float
    magnitude: np.ndarray
    total: np.ndarray | None = None
    provenance: str = "synthesized"
    bc: str = "unknown"
    obstacles: list = field(default_factory=list)

    def __post_init__(self):
        shape = (self.survey.N_r, self.survey.N_s)
        mag = np.asarray(self.magnitude, dtype=float)
        if mag.shape != shape:
            raise DatasetFormatError(f"magnitude has shape {mag.shape}, expected {shape}")
        if not np.all(np.isfinite(mag)):
            raise DatasetFormatError("magnitude contains non-finite entries")
        object.__setattr__(self, "magnitude", mag)
        if self.total is not None:
            tot = np.asarray(self.total, dtype=complex)
            if tot.shape != shape:
                raise DatasetFormatError("total field has the wrong shape")
            object.__setattr__(self, "total", tot)

    @property
    def has_phase(self):
        return self.total is not None

    def incident(self):
        """u^i(x_r, x_s) = Phi(x_r, x_s), shape (N_r, N_s)."""
        return incident_matrix(self.survey, self.k)

    def scattered(self):
        return None if self.total is None else self.total - self.incident()

    def with_magnitude(self, magnitude, provenance=None):
        """Copy carrying new magnitudes (the phase, now inconsistent, is dropped)."""
        return ScatteringDataset(
            self.survey, self.k, magnitude, None, provenance or self.provenance, self.bc, self.obstacles
        )


def incident_matrix(survey, k):
    xr = survey.receivers()
    xs = survey.sources()
    return fundamental_solution(k, xr[:, None, :], xs[None, :, :])


def synthesize_dataset(curves, bc, k, survey, keep_phase=False, sizes=None, min_per_wavelength=10.0):
    """Simulate |u(x_r, x_s)| for every source/receiver pair.

    One boundary system is assembled and factored; the N_s point-source
    right-hand sides are solved together.
    """
    curves = list(curves)
    bc = Dirichlet() if bc is None else bc
    xs = survey.sources()
    xr = survey.receivers()
    radius = min(survey.R_s, survey.R_r)
    for c in curves:
        if c.max_radius() >= radius:
            raise GeometryError("obstacle crosses the source or receiver circle")
    u_inc = incident_matrix(survey, k)
    if not curves:
        total = u_inc
    else:
        system = ScatteringSystem(curves, k, bc, sizes, min_per_wavelength)
        mesh = system.mesh
        if inside_any(curves, xs).any() or inside_any(curves, xr).any():
            raise GeometryError("a transducer lies inside an obstacle")
        pts = mesh.points
        nodes_inc = fundamental_solution(k, pts[:, None, :], xs[None, :, :])
        grads = fundamental_solution_gradient(k, xs[None, :, :], pts[:, None, :])
        nodes_dinc = np.sum(grads * mesh.normals[:, None, :], axis=-1)
        _, a, b, _, _ = system.solve_traces(nodes_inc, nodes_dinc)
        e_dl, e_sl = layer_evaluation_matrices(mesh, k, xr)
        total = u_inc + (e_dl @ a - e_sl @ b)
    return ScatteringDataset(
        survey,
        float(k),
        np.abs(total),
        total if keep_phase else None,
        "synthesized",
        bc.describe(),
        [c.to_dict() for c in curves],
    )


def _fmt(v):
    return format(float(v), ".17g")


def write_dataset(dataset, path):
    sv = dataset.survey
    lines = [
        f"format_version={FORMAT_VERSION}",
        f"k={_fmt(dataset.k)}",
        f"R_s={_fmt(sv.R_s)}",
        f"R_r={_fmt(sv.R_r)}",
        f"N_s={sv.N_s}",
        f"N_r={sv.N_r}",
        f"receiver_offset={_fmt(sv.receiver_offset)}",
    ]
    if sv.source_offset != 0.0:
        lines.append(f"source_offset={_fmt(sv.source_offset)}")
    lines += [
        f"has_phase={int(dataset.has_phase)}",
        f"bc={dataset.bc}",
        f"obstacles={json.dumps(dataset.obstacles, sort_keys=True)}",
        "---",
    ]
    if dataset.has_phase:
        tot = dataset.total
        for r in range(sv.N_r):
            for s in range(sv.N_s):
                z = tot[r, s]
                lines.append(f"{r} {s} {_fmt(z.real)} {_fmt(z.imag)}")
    else:
        mag = dataset.magnitude
        for r in range(sv.N_r):
            for s in range(sv.N_s):
                lines.append(f"{r} {s} {_fmt(mag[r, s])}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_dataset(path):
    """Parse a dataset file; the result is tagged ``ingested``."""
    with open(path, encoding="ascii") as fh:
        text = fh.read().splitlines()
    try:
        sep = text.index("---")
    except ValueError:
        raise DatasetFormatError("missing '---' header terminator") from None
    header = {}
    for lineno, line in enumerate(text[:sep], 1):
        key, eq, value = line.partition("=")
        if not eq:
            raise DatasetFormatError(f"line {lineno}: expected key=value")
        header[key.strip()] = value.strip()
    if header.get("format_version") != str(FORMAT_VERSION):
        raise DatasetFormatError(f"unsupported format_version {header.get('format_version')!r}")
    missing = [k for k in _HEADER_KEYS if k not in header]
    if missing:
        raise DatasetFormatError(f"header lacks {', '.join(missing)}")
    try:
        survey = SurveyGeometry(
            float(header["R_s"]),
            int(header["N_s"]),
            float(header["R_r"]),
            int(header["N_r"]),
            float(header["receiver_offset"]),
            float(header.get("source_offset", 0.0)),
        )
        k = float(header["k"])
        has_phase = int(header["has_phase"])
        obstacles = json.loads(header["obstacles"])
    except (ValueError, json.JSONDecodeError) as exc:
        raise DatasetFormatError(f"bad header value: {exc}") from None
    ncol = 4 if has_phase else 3
    records = text[sep + 1:]
    expected = survey.N_r * survey.N_s
    if len(records) != expected:
        raise DatasetFormatError(f"expected {expected} records, found {len(records)}")
    data = np.empty((expected, ncol - 2))
    for i, line in enumerate(records):
        parts = line.split()
        if len(parts) != ncol:
            raise DatasetFormatError(f"record {i}: expected {ncol} fields")
        r, s = int(parts[0]), int(parts[1])
        if (r, s) != divmod(i, survey.N_s):
            raise DatasetFormatError(f"record {i}: indices out of receiver-major order")
        data[i] = [float(v) for v in parts[2:]]
    shape = (survey.N_r, survey.N_s)
    if has_phase:
        total = (data[:, 0] + 1j * data[:, 1]).reshape(shape)
        mag = np.abs(total)
    else:
        total = None
        mag = data[:, 0].reshape(shape)
    return ScatteringDataset(survey, k, mag, total, "ingested", header["bc"], obstacles)


def curves_from_obstacles(obstacles):
    """Rebuild curves from the ``obstacles`` header entries."""
    out = []
    for ob in obstacles:
        kind = ob["kind"]
        kw = {"center": tuple(ob.get("center", (0.0, 0.0)))}
        if kind == "circle":
            out.append(ParametricCurve.circle(ob.get("radius", 1.0), **kw))
            continue
        kw["rotation"] = ob.get("rotation", 0.0)
        if kind == "p_leaf":
            out.append(ParametricCurve.p_leaf(ob.get("p", 5), ob.get("amplitude", 0.2), **kw))
        else:
            out.append(getattr(ParametricCurve, kind)(**kw))
    return out


__all__ = [
    "ScatteringDataset",
    "synthesize_dataset",
    "write_dataset",
    "read_dataset",
    "incident_matrix",
    "curves_from_obstacles",
]
