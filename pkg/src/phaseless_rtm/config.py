"""JSON experiment configuration with strict key checking.

Schema (unknown keys anywhere are an error)::

    {
      "name": str,                         optional, used in file names
      "obstacles": [obstacle, ...],        or "scenes": [{"name", "obstacles"}]
      "k": float | "wavelength": float | "wavelengths": [float, ...],
      "survey": {"R_s", "R_r", "N_s", "N_r", "receiver_offset"?},
      "grid": {"x_min", "x_max", "y_min", "y_max", "nx", "ny"},
      "noise": {"mu": float | [float, ...], "seed": int},            optional
      "outputs": {"dir": str, "formats": ["csv", "pgm"], "keep_phase": bool},
      "dataset": str,              optional: image this file instead of synthesising
      "oracle": {"points": [[x, y], ...]} | {"grid": grid},          optional
      "quadrature": {"min_per_wavelength": float}                    optional
    }

    obstacle = {"kind": "circle" | "kite" | "p_leaf" | "peanut" | "rounded_square",
                "params": {"radius"?, "p"?, "amplitude"?},
                "center": [x, y], "rotation": float,
                "bc": "dirichlet" | "sound_hard" | {"impedance": eta}}
    eta = number | [{"from": rad, "to": rad, "value": number}, ...]
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

from .errors import ConfigError, GeometryError, RTMError
from .forward import Dirichlet, Impedance, ImpedanceProfile
from .geometry import ImageGrid, ParametricCurve, SurveyGeometry, check_disjoint

_TOP = {"name", "obstacles", "scenes", "dataset", "k", "wavelength", "wavelengths", "survey", "grid",
        "noise", "outputs", "oracle", "quadrature", "description"}
_OBSTACLE = {"kind", "params", "center", "rotation", "bc"}
_PARAMS = {"circle": {"radius"}, "p_leaf": {"p", "amplitude"}}
_SURVEY = {"R_s", "R_r", "N_s", "N_r", "receiver_offset"}
_GRID = {"x_min", "x_max", "y_min", "y_max", "nx", "ny"}
_NOISE = {"mu", "seed"}
_OUTPUTS = {"dir", "formats", "keep_phase"}
_ORACLE = {"points", "grid"}
_QUAD = {"min_per_wavelength"}


@dataclass
class Scene:
    name: str
    curves: list
    bc: object


@dataclass
class ExperimentConfig:
    name: str
    scenes: list
    wavenumbers: list
    survey: SurveyGeometry
    grid: ImageGrid | None
    mu: list = field(default_factory=list)
    seed: int = 0
    out_dir: str = "out"
    formats: tuple = ("csv", "pgm")
    keep_phase: bool = False
    dataset_path: str | None = None
    oracle_points: list | None = None
    oracle_grid: ImageGrid | None = None
    min_per_wavelength: float = 10.0

    @property
    def k(self):
        return self.wavenumbers[0]

    def with_overrides(self, k=None, mu=None, seed=None, out_dir=None):
        cfg = self
        if k is not None:
            if not k > 0:
                raise ConfigError("--k must be positive")
            cfg = replace(cfg, wavenumbers=[float(k)])
        if mu is not None:
            if mu < 0:
                raise ConfigError("--mu must be non-negative")
            cfg = replace(cfg, mu=[float(mu)])
        if seed is not None:
            cfg = replace(cfg, seed=int(seed))
        if out_dir is not None:
            cfg = replace(cfg, out_dir=str(out_dir))
        return cfg


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(extra)}")


def _need(obj, key, where):
    if key not in obj:
        raise ConfigError(f"{where}: missing required key '{key}'")
    return obj[key]


def _number(value, where, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}: expected a finite number")
    if positive and value <= 0:
        raise ConfigError(f"{where}: must be positive")
    return float(value)


def _integer(value, where, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{where}: expected an integer >= {minimum}")
    return value


def _parse_bc(spec, where):
    if spec in (None, "dirichlet"):
        return Dirichlet()
    if spec == "sound_hard":
        return ImpedanceProfile.constant(0.0)
    if isinstance(spec, dict):
        _check_keys(spec, {"impedance"}, where)
        eta = _need(spec, "impedance", where)
        if isinstance(eta, list):
            for i, seg in enumerate(eta):
                _check_keys(seg, {"from", "to", "value"}, f"{where}.impedance[{i}]")
                for key in ("from", "to", "value"):
                    _number(_need(seg, key, f"{where}.impedance[{i}]"), f"{where}.impedance[{i}].{key}")
        else:
            _number(eta, f"{where}.impedance")
        try:
            return ImpedanceProfile.coerce(eta)
        except RTMError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}: unknown boundary condition {spec!r}")


def _parse_obstacle(ob, where):
    _check_keys(ob, _OBSTACLE, where)
    kind = _need(ob, "kind", where)
    params = ob.get("params", {})
    _check_keys(params, _PARAMS.get(kind, set()), f"{where}.params")
    center = ob.get("center", [0.0, 0.0])
    if not (isinstance(center, list) and len(center) == 2):
        raise ConfigError(f"{where}.center: expected [x, y]")
    center = tuple(_number(v, f"{where}.center") for v in center)
    rotation = _number(ob.get("rotation", 0.0), f"{where}.rotation")
    try:
        curve = ParametricCurve(
            kind,
            radius=_number(params.get("radius", 1.0), f"{where}.params.radius", positive=True),
            p=params.get("p", 5),
            amplitude=_number(params.get("amplitude", 0.2), f"{where}.params.amplitude"),
            center=center,
            rotation=rotation,
        )
    except GeometryError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    return curve, _parse_bc(ob.get("bc"), f"{where}.bc")


def _parse_scene(name, obstacles, where):
    if not isinstance(obstacles, list):
        raise ConfigError(f"{where}: expected a list of obstacles")
    curves, bcs = [], []
    for i, ob in enumerate(obstacles):
        c, b = _parse_obstacle(ob, f"{where}[{i}]")
        curves.append(c)
        bcs.append(b)
    kinds = {"dirichlet" if isinstance(b, Dirichlet) else "impedance" for b in bcs}
    if len(kinds) > 1:
        raise ConfigError(f"{where}: mixing sound-soft and impedance obstacles is not supported")
    if not bcs or kinds == {"dirichlet"}:
        bc = Dirichlet()
    else:
        bc = Impedance(tuple(bcs))
    try:
        check_disjoint(curves)
    except GeometryError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    return Scene(name, curves, bc)


def _parse_grid(obj, where):
    _check_keys(obj, _GRID, where)
    vals = {k: _need(obj, k, where) for k in sorted(_GRID)}
    try:
        return ImageGrid(
            _number(vals["x_min"], f"{where}.x_min"),
            _number(vals["x_max"], f"{where}.x_max"),
            _number(vals["y_min"], f"{where}.y_min"),
            _number(vals["y_max"], f"{where}.y_max"),
            _integer(vals["nx"], f"{where}.nx", 2),
            _integer(vals["ny"], f"{where}.ny", 2),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from None


def parse_config(raw, source="<config>"):
    """Validate a decoded JSON object and build an :class:`ExperimentConfig`."""
    _check_keys(raw, _TOP, source)
    name = raw.get("name", "experiment")
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{source}.name: expected a non-empty string")

    if ("obstacles" in raw) == ("scenes" in raw):
        raise ConfigError(f"{source}: give exactly one of 'obstacles' or 'scenes'")
    if "obstacles" in raw:
        scenes = [_parse_scene(name, raw["obstacles"], f"{source}.obstacles")]
    else:
        scenes = []
        for i, sc in enumerate(raw["scenes"]):
            _check_keys(sc, {"name", "obstacles"}, f"{source}.scenes[{i}]")
            scenes.append(
                _parse_scene(
                    _need(sc, "name", f"{source}.scenes[{i}]"),
                    _need(sc, "obstacles", f"{source}.scenes[{i}]"),
                    f"{source}.scenes[{i}].obstacles",
                )
            )
        if not scenes:
            raise ConfigError(f"{source}.scenes: empty")

    given = [key for key in ("k", "wavelength", "wavelengths") if key in raw]
    if len(given) != 1:
        raise ConfigError(f"{source}: give exactly one of 'k', 'wavelength', 'wavelengths'")
    if "k" in raw:
        ks = [_number(raw["k"], f"{source}.k", positive=True)]
    elif "wavelength" in raw:
        ks = [2 * math.pi / _number(raw["wavelength"], f"{source}.wavelength", positive=True)]
    else:
        lams = raw["wavelengths"]
        if not isinstance(lams, list) or not lams:
            raise ConfigError(f"{source}.wavelengths: expected a non-empty list")
        ks = [2 * math.pi / _number(v, f"{source}.wavelengths", positive=True) for v in lams]

    sv = _need(raw, "survey", source)
    _check_keys(sv, _SURVEY, f"{source}.survey")
    try:
        survey = SurveyGeometry(
            _number(_need(sv, "R_s", f"{source}.survey"), f"{source}.survey.R_s", positive=True),
            _integer(_need(sv, "N_s", f"{source}.survey"), f"{source}.survey.N_s"),
            _number(_need(sv, "R_r", f"{source}.survey"), f"{source}.survey.R_r", positive=True),
            _integer(_need(sv, "N_r", f"{source}.survey"), f"{source}.survey.N_r"),
            None if "receiver_offset" not in sv else _number(sv["receiver_offset"], f"{source}.survey.receiver_offset"),
        )
    except GeometryError as exc:
        raise ConfigError(f"{source}.survey: {exc}") from None
    radius = min(survey.R_s, survey.R_r)
    for sc in scenes:
        for c in sc.curves:
            if c.max_radius() >= radius:
                raise ConfigError(f"{source}: obstacle {c.kind} reaches the transducer circles")

    grid = _parse_grid(raw["grid"], f"{source}.grid") if "grid" in raw else None

    mu, seed = [], 0
    if "noise" in raw:
        nz = raw["noise"]
        _check_keys(nz, _NOISE, f"{source}.noise")
        m = nz.get("mu", [])
        m = m if isinstance(m, list) else [m]
        mu = [_number(v, f"{source}.noise.mu") for v in m]
        if any(v < 0 for v in mu):
            raise ConfigError(f"{source}.noise.mu: must be non-negative")
        seed = _integer(nz.get("seed", 0), f"{source}.noise.seed", 0)

    out = raw.get("outputs", {})
    _check_keys(out, _OUTPUTS, f"{source}.outputs")
    formats = tuple(out.get("formats", ["csv", "pgm"]))
    if not set(formats) <= {"csv", "pgm"}:
        raise ConfigError(f"{source}.outputs.formats: only 'csv' and 'pgm' are known")
    keep_phase = out.get("keep_phase", False)
    if not isinstance(keep_phase, bool):
        raise ConfigError(f"{source}.outputs.keep_phase: expected true or false")

    oracle_points = oracle_grid = None
    if "oracle" in raw:
        orc = raw["oracle"]
        _check_keys(orc, _ORACLE, f"{source}.oracle")
        if "points" in orc:
            pts = orc["points"]
            if not isinstance(pts, list) or not all(isinstance(p, list) and len(p) == 2 for p in pts):
                raise ConfigError(f"{source}.oracle.points: expected [[x, y], ...]")
            oracle_points = [[_number(v, f"{source}.oracle.points") for v in p] for p in pts]
        if "grid" in orc:
            oracle_grid = _parse_grid(orc["grid"], f"{source}.oracle.grid")

    if "dataset" in raw and not isinstance(raw["dataset"], str):
        raise ConfigError(f"{source}.dataset: expected a file path")

    mpw = 10.0
    if "quadrature" in raw:
        _check_keys(raw["quadrature"], _QUAD, f"{source}.quadrature")
        mpw = _number(raw["quadrature"].get("min_per_wavelength", 10.0), f"{source}.quadrature.min_per_wavelength", positive=True)

    return ExperimentConfig(
        name=name,
        scenes=scenes,
        wavenumbers=ks,
        survey=survey,
        grid=grid,
        mu=mu,
        seed=seed,
        out_dir=str(out.get("dir", "out")),
        formats=formats,
        keep_phase=keep_phase,
        dataset_path=raw.get("dataset"),
        oracle_points=oracle_points,
        oracle_grid=oracle_grid,
        min_per_wavelength=mpw,
    )


def load_config(path):
    """Read and validate a JSON config file; syntax errors report line and column."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(raw, str(path))
