"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``. Runtimes are part of each criterion and
are checked against the stated budget.
"""

import hashlib
import json
import pathlib
import subprocess
import sys
import time

import numpy as np
import pytest

from oracles import disk_oracle_points
from phaseless_rtm.dataset import synthesize_dataset
from phaseless_rtm.forward import (
    Dirichlet,
    Impedance,
    PlaneWave,
    PointSource,
    disk_far_field,
    disk_series,
    energy_identity,
    evaluate_far_field,
    evaluate_scattered,
    far_field_constant,
    solve,
)
from phaseless_rtm.geometry import ParametricCurve, SurveyGeometry, build_grid, quadrature_size
from phaseless_rtm.imaging import (
    RtmImage,
    corrected_data,
    decomposition_images,
    fullphase_data,
    imaging_values,
    multifrequency_stack,
    rtm_image_phaseless,
    theoretical_image,
)
from phaseless_rtm.metrics import localization_score, normalized_cross_correlation, normalized_max_difference
from phaseless_rtm.noise import add_noise, noise_generator, noise_metrics, noise_sigma
from phaseless_rtm.specfun import hankel1

K = 4 * np.pi
SEED = 20240501
RECIPES = pathlib.Path(__file__).resolve().parents[1] / "recipes"
SHAPES = {
    "circle": ParametricCurve.circle(1.0),
    "peanut": ParametricCurve.peanut(),
    "kite": ParametricCurve.kite(),
    "rounded_square": ParametricCurve.rounded_square(),
}
WAVELENGTHS = (1 / 1.8, 1 / 1.9, 1 / 2.0, 1 / 2.1, 1 / 2.2)

# filled as criteria run; conftest prints these at the end of the session
ACCEPTANCE_LINES = []


def _unit(angles):
    return np.stack([np.cos(angles), np.sin(angles)], -1)


def _grid201():
    return build_grid(-3.0, 3.0, -3.0, 3.0, 201, 201)


def _record(number, title, budget, fn):
    start = time.perf_counter()
    checks = fn()
    elapsed = time.perf_counter() - start
    checks.append((f"runtime {elapsed:.1f}s < {budget:g}s", elapsed < budget))
    ok = all(passed for _, passed in checks)
    failed = [name for name, passed in checks if not passed]
    detail = "; ".join(name for name, _ in checks)
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}"
    if failed:
        line += " | failing: " + "; ".join(failed)
    print(line, flush=True)
    ACCEPTANCE_LINES.append(line)
    return ok, line


# ------------------------------------------------------------------ 1


def special_function_bounds():
    t = np.logspace(-6, 2, 10_001)[1:]
    h = np.abs(hankel1(0, t))
    upper = int(np.sum(h > np.sqrt(2 / (np.pi * t))))
    small = t < 1
    lower = int(np.sum(h[small] < 2 / (5 * np.pi * np.e) * np.abs(np.log(t[small]))))
    mono = int(np.sum(np.diff(t * h**2) < 0))
    return [
        (f"upper-bound violations {upper}", upper == 0),
        (f"log lower-bound violations {lower}", lower == 0),
        (f"t|H0|^2 decreases {mono}", mono == 0),
    ]


# ------------------------------------------------------------------ 2


def solver_vs_disk_oracle():
    disk = ParametricCurve.circle(1.0)
    pts = disk_oracle_points(np.random.default_rng(SEED), 100, 1.2, 6.0)
    xhat = _unit(2 * np.pi * np.arange(64) / 64)
    n = quadrature_size(disk, K)
    checks = [(f"quadrature {n} nodes", n == 126)]
    for bc, tol in ((Dirichlet(), 1e-6), (Impedance(5.0), 1e-5)):
        for label, inc in (("plane", PlaneWave((1.0, 0.0))), ("point", PointSource((10.0, 0.0)))):
            sol = solve([disk], K, inc, bc)
            ref = disk_series(1.0, K, inc, pts, bc)
            near = np.max(np.abs(evaluate_scattered(sol, pts) - ref) / np.abs(ref))
            ref_far = disk_far_field(1.0, K, inc, xhat, bc)
            far = np.max(np.abs(evaluate_far_field(sol, xhat) - ref_far) / np.abs(ref_far))
            tag = f"{bc.kind} {label}"
            checks.append((f"{tag} near {near:.1e}", near <= tol))
            checks.append((f"{tag} far {far:.1e}", far <= tol))
    return checks


# ------------------------------------------------------------------ 3


def identity_suite():
    checks = []
    kite, peanut = ParametricCurve.kite(), ParametricCurve.peanut()
    for name, curve in (("circle", ParametricCurve.circle(1.0)), ("kite", kite), ("peanut", peanut)):
        for bc in (Dirichlet(), Impedance(5.0)):
            flux, energy = energy_identity(solve([curve], K, PointSource((6.0, 2.0)), bc), 512)
            gap = abs(flux - energy) / energy
            checks.append((f"energy {name}/{bc.kind} {gap:.1e}", gap <= 1e-4))
    gamma = far_field_constant(K)
    xs = np.array([4.0, 3.0])
    worst = 0.0
    for curve, bc in ((kite, Dirichlet()), (peanut, Impedance(5.0))):
        point = solve([curve], K, PointSource(xs), bc)
        for ang in (0.3, 2.0, 4.4):
            d = np.array([np.cos(ang), np.sin(ang)])
            far = evaluate_far_field(point, d)
            near = evaluate_scattered(solve([curve], K, PlaneWave(tuple(-d)), bc), xs)
            worst = max(worst, abs(far - gamma * near) / abs(far))
    checks.append((f"mixed reciprocity {worst:.1e}", worst <= 1e-6))
    # swapping the angular offsets of sources and receivers swaps their roles
    n = 24
    a = SurveyGeometry(10.0, n, 10.0, n, receiver_offset=np.pi / n, source_offset=0.0)
    b = SurveyGeometry(10.0, n, 10.0, n, receiver_offset=0.0, source_offset=np.pi / n)
    moved = [ParametricCurve.kite(center=(0.5, 0.0))]
    for bc in (Dirichlet(), Impedance(5.0)):
        us_a = synthesize_dataset(moved, bc, K, a, keep_phase=True).scattered()
        us_b = synthesize_dataset(moved, bc, K, b, keep_phase=True).scattered()
        gap = np.max(np.abs(us_a - us_b.T)) / np.max(np.abs(us_a))
        checks.append((f"point-source reciprocity {bc.kind} {gap:.1e}", gap <= 1e-8))
    return checks


# ------------------------------------------------------------------ 4


def algebraic_decomposition():
    sv = SurveyGeometry(10.0, 128, 10.0, 128)
    ds = synthesize_dataset([SHAPES["circle"]], Dirichlet(), K, sv, keep_phase=True)
    ims = decomposition_images(ds, build_grid(-3.0, 3.0, -3.0, 3.0, 101, 101))
    recon = ims["fullphase"].values + ims["quadratic"].values + ims["cross"].values
    peak = np.max(np.abs(ims["phaseless"].values))
    gap = np.max(np.abs(ims["phaseless"].values - recon)) / peak
    return [(f"residual {gap:.1e} of image max", gap <= 1e-12)]


# ------------------------------------------------------------------ 5


def localization():
    sv = SurveyGeometry(10.0, 128, 10.0, 128)
    grid = _grid201()
    checks = []
    for name, curve in SHAPES.items():
        ds = synthesize_dataset([curve], Dirichlet(), K, sv)
        score = localization_score(rtm_image_phaseless(ds, grid), [curve])
        need = 0.9 if name == "circle" else 0.8
        checks.append((f"{name} {score:.3f} >= {need}", score >= need))
    return checks


# ------------------------------------------------------------------ 6


def _phaseless_and_fullphase(curve, radius, n, grid):
    ds = synthesize_dataset([curve], Dirichlet(), K, SurveyGeometry(radius, n, radius, n), keep_phase=True)
    deltas = np.stack([corrected_data(ds).delta, fullphase_data(ds).delta])
    vals = imaging_values(ds.survey, K, deltas, grid.points())
    return [RtmImage(grid.with_values(v.reshape(grid.ny, grid.nx)), kind, K, ds.survey)
            for v, kind in zip(vals, ("phaseless", "fullphase"))]


def phaseless_close_to_fullphase():
    grid = _grid201()
    checks = []
    for name, curve in SHAPES.items():
        ph10, fp10 = _phaseless_and_fullphase(curve, 10.0, 128, grid)
        ph20, fp20 = _phaseless_and_fullphase(curve, 20.0, 256, grid)
        ncc = normalized_cross_correlation(ph10, fp10)
        d10 = normalized_max_difference(ph10, fp10)
        d20 = normalized_max_difference(ph20, fp20)
        checks.append((f"{name} ncc {ncc:.4f} >= 0.95", ncc >= 0.95))
        checks.append((f"{name} maxdiff {d10:.4f} -> {d20:.4f} ratio {d20 / d10:.3f} <= 0.8", d20 <= 0.8 * d10))
    return checks


# ------------------------------------------------------------------ 7


def theoretical_image_oracle():
    circle = [SHAPES["circle"]]
    radii = np.linspace(0.0, 4.0, 17)
    pts = np.stack([radii, np.zeros_like(radii)], -1)
    theory = theoretical_image(circle, Dirichlet(), K, pts)
    ds = synthesize_dataset(circle, Dirichlet(), K, SurveyGeometry(20.0, 256, 20.0, 256))
    rtm = imaging_values(ds.survey, K, corrected_data(ds).delta, pts)
    t_n = theory / np.max(np.abs(theory))
    r_n = rtm / np.max(np.abs(rtm))
    gap = float(np.max(np.abs(t_n - r_n)))
    boundary = int(np.argmin(np.abs(radii - 1.0)))
    return [
        (f"max normalized gap {gap:.3f} <= 0.15", gap <= 0.15),
        (f"theory peak at |z|={radii[np.argmax(theory)]:g}", int(np.argmax(theory)) == boundary),
        (f"rtm peak at |z|={radii[np.argmax(rtm)]:g}", int(np.argmax(rtm)) == boundary),
    ]


# ------------------------------------------------------------------ 8


def noise_pipeline():
    circle = [SHAPES["circle"]]
    sv = SurveyGeometry(10.0, 256, 20.0, 256)
    grid = _grid201()
    checks = []
    clean = synthesize_dataset(circle, Dirichlet(), K, sv)
    mags = clean.magnitude
    exact = all(noise_sigma(mags, mu) == mu * np.max(np.abs(mags)) for mu in (0.1, 0.2, 0.3, 0.4))
    checks.append(("sigma = mu max|u| exactly", exact))
    ratios = []
    for j, mu in enumerate((0.1, 0.2, 0.3, 0.4)):
        rep = noise_metrics(mags, add_noise(mags, mu, noise_generator(SEED, j, 0)), mu)
        ratios.append(rep.noise_norm / rep.sigma)
    ratio_text = ", ".join(f"{r:.4f}" for r in ratios)
    checks.append((f"noise_norm/sigma [{ratio_text}] in [0.98, 1.02]", all(0.98 <= r <= 1.02 for r in ratios)))

    noisy = clean.with_magnitude(add_noise(mags, 0.2, noise_generator(SEED, 1, 0)))
    score = localization_score(rtm_image_phaseless(noisy, grid), circle)
    checks.append((f"mu=0.2 single-frequency score {score:.3f} >= 0.7", score >= 0.7))

    images, scores = [], []
    for i, lam in enumerate(WAVELENGTHS):
        ds = synthesize_dataset(circle, Dirichlet(), 2 * np.pi / lam, sv)
        noisy = ds.with_magnitude(add_noise(ds.magnitude, 0.2, noise_generator(SEED, 1, i)))
        images.append(rtm_image_phaseless(noisy, grid))
        scores.append(localization_score(images[-1], circle))
    stacked = localization_score(multifrequency_stack(images), circle)
    text = ", ".join(f"{s:.3f}" for s in scores)
    checks.append((f"stack {stacked:.3f} > worst single [{text}]", stacked > min(scores)))
    return checks


# ------------------------------------------------------------------ 9


def _reduced_config(recipe, tmp, nx=41, n=32):
    cfg = json.loads((RECIPES / recipe).read_text())
    if "grid" in cfg:
        cfg["grid"].update(nx=nx, ny=nx)
    cfg["survey"].update(N_s=n, N_r=n)
    path = tmp / recipe
    path.write_text(json.dumps(cfg))
    return path


def _digest_tree(root):
    return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file()}


def determinism(tmp):
    runs = [
        ("synth", "sound_soft_circle.json"),
        ("compare", "sound_soft_circle.json"),
        ("image", "sound_soft_shapes.json"),
        ("oracle", "circle_oracle.json"),
        ("noise-sweep", "noisy_circle.json"),
    ]
    checks = []
    for mode, recipe in runs:
        cfg = _reduced_config(recipe, tmp)
        digests = []
        for attempt in ("a", "b"):
            out = tmp / f"{mode}_{attempt}"
            proc = subprocess.run(
                [sys.executable, "-m", "phaseless_rtm", mode, "--config", str(cfg), "--out-dir", str(out)],
                capture_output=True, text=True, check=False,
            )
            if proc.returncode != 0:
                raise RuntimeError(proc.stderr)
            digests.append(_digest_tree(out))
        same = bool(digests[0]) and digests[0] == digests[1]
        checks.append((f"{mode} {len(digests[0])} files identical", same))
    return checks


# ------------------------------------------------------------------ pytest


def _check(number, title, budget, fn):
    ok, line = _record(number, title, budget, fn)
    assert ok, line


def test_criterion_1_special_function_bounds():
    _check(1, "special-function bounds", 1.0, special_function_bounds)


def test_criterion_2_solver_matches_disk_series():
    _check(2, "solver vs disk series", 10.0, solver_vs_disk_oracle)


def test_criterion_3_identity_suite():
    _check(3, "energy and reciprocity identities", 10.0, identity_suite)


@pytest.mark.slow
def test_criterion_4_algebraic_decomposition():
    _check(4, "image decomposition", 120.0, algebraic_decomposition)


@pytest.mark.slow
def test_criterion_5_localization():
    _check(5, "localization on four shapes", 600.0, localization)


@pytest.mark.slow
def test_criterion_6_phaseless_close_to_fullphase():
    _check(6, "phaseless vs full-phase", 1200.0, phaseless_close_to_fullphase)


@pytest.mark.slow
def test_criterion_7_theoretical_image_oracle():
    _check(7, "resolution-analysis oracle", 300.0, theoretical_image_oracle)


@pytest.mark.slow
def test_criterion_8_noise_pipeline():
    _check(8, "noise pipeline", 1800.0, noise_pipeline)


@pytest.mark.slow
def test_criterion_9_determinism(tmp_path):
    _check(9, "determinism", 1800.0, lambda: determinism(tmp_path))


if __name__ == "__main__":
    import tempfile

    criteria = [
        (1, "special-function bounds", 1.0, special_function_bounds),
        (2, "solver vs disk series", 10.0, solver_vs_disk_oracle),
        (3, "energy and reciprocity identities", 10.0, identity_suite),
        (4, "image decomposition", 120.0, algebraic_decomposition),
        (5, "localization on four shapes", 600.0, localization),
        (6, "phaseless vs full-phase", 1200.0, phaseless_close_to_fullphase),
        (7, "resolution-analysis oracle", 300.0, theoretical_image_oracle),
        (8, "noise pipeline", 1800.0, noise_pipeline),
    ]
    results = [_record(*c)[0] for c in criteria]
    with tempfile.TemporaryDirectory() as tmp:
        results.append(_record(9, "determinism", 1800.0, lambda: determinism(pathlib.Path(tmp)))[0])
    sys.exit(0 if all(results) else 1)
