"""Experiment orchestration behind the command-line interface."""

from __future__ import annotations

import json
import os
import sys

import numpy as np

from .dataset import read_dataset, synthesize_dataset, write_dataset
from .errors import ConfigError
from .imaging import (
    RtmImage,
    corrected_data,
    decomposition_images,
    imaging_values,
    multifrequency_stack,
    rtm_image_phaseless,
    theoretical_image,
    write_image_csv,
    write_image_pgm,
)
from .metrics import localization_score, normalized_cross_correlation, normalized_max_difference
from .noise import add_noise, format_noise_table, noise_generator, noise_metrics

MODES = ("synth", "image", "compare", "oracle", "noise-sweep")


class _Run:
    def __init__(self, cfg, out):
        self.cfg = cfg
        self.out = out
        self.summary = {"name": cfg.name, "scenes": {}}
        os.makedirs(cfg.out_dir, exist_ok=True)

    def path(self, stem, ext):
        return os.path.join(self.cfg.out_dir, f"{stem}.{ext}")

    def say(self, text):
        print(text, file=self.out)

    def tag(self, scene, i):
        return scene.name if len(self.cfg.wavenumbers) == 1 else f"{scene.name}_f{i}"

    def synth(self, scene, k, keep_phase=False):
        return synthesize_dataset(
            scene.curves, scene.bc, k, self.cfg.survey, keep_phase,
            min_per_wavelength=self.cfg.min_per_wavelength,
        )

    def save_image(self, image, stem):
        written = []
        if "csv" in self.cfg.formats:
            write_image_csv(image, self.path(stem, "csv"))
            written.append(self.path(stem, "csv"))
        if "pgm" in self.cfg.formats:
            write_image_pgm(image, self.path(stem, "pgm"))
            written.append(self.path(stem, "pgm"))
        return written

    def score(self, image, scene):
        if not scene.curves or np.ptp(image.values) == 0:
            return None
        return localization_score(image, scene.curves)

    def need_grid(self):
        if self.cfg.grid is None:
            raise ConfigError("this mode needs a 'grid' section")
        return self.cfg.grid


def _mode_synth(run):
    for scene in run.cfg.scenes:
        rec = []
        for i, k in enumerate(run.cfg.wavenumbers):
            ds = run.synth(scene, k, run.cfg.keep_phase)
            path = run.path(run.tag(scene, i) + "_dataset", "txt")
            write_dataset(ds, path)
            rec.append({"k": k, "max_magnitude": float(ds.magnitude.max()), "file": os.path.basename(path)})
            run.say(f"synth {scene.name} k={k:.6g} max|u|={ds.magnitude.max():.6e} -> {path}")
        run.summary["scenes"][scene.name] = rec


def _datasets(run, scene):
    if run.cfg.dataset_path:
        return [read_dataset(run.cfg.dataset_path)]
    return [run.synth(scene, k) for k in run.cfg.wavenumbers]


def _mode_image(run):
    grid = run.need_grid()
    mu = run.cfg.mu[0] if run.cfg.mu else 0.0
    for scene in run.cfg.scenes:
        images = []
        for i, ds in enumerate(_datasets(run, scene)):
            if mu > 0:
                ds = ds.with_magnitude(add_noise(ds.magnitude, mu, noise_generator(run.cfg.seed, 0, i)))
            im = rtm_image_phaseless(ds, grid)
            images.append(im)
            run.save_image(im, run.tag(scene, i) + "_phaseless")
        rec = {"scores": [run.score(im, scene) for im in images]}
        if len(images) > 1:
            stack = multifrequency_stack(images)
            run.save_image(stack, f"{scene.name}_stack")
            rec["stack_score"] = run.score(stack, scene)
        run.summary["scenes"][scene.name] = rec
        run.say(f"image {scene.name} mu={mu:g} localization={rec}")


def _mode_compare(run):
    grid = run.need_grid()
    for scene in run.cfg.scenes:
        recs = []
        for i, k in enumerate(run.cfg.wavenumbers):
            ds = run.synth(scene, k, keep_phase=True)
            ims = decomposition_images(ds, grid)
            ph, fp = ims["phaseless"], ims["fullphase"]
            diff = RtmImage(grid.with_values(ph.values - fp.values), "difference", k, ds.survey)
            tag = run.tag(scene, i)
            run.save_image(ph, tag + "_phaseless")
            run.save_image(fp, tag + "_fullphase")
            run.save_image(diff, tag + "_difference")
            recon = fp.values + ims["quadratic"].values + ims["cross"].values
            peak = float(np.max(np.abs(ph.values)))
            rec = {
                "k": k,
                "max_abs_difference": normalized_max_difference(ph, fp),
                "ncc": normalized_cross_correlation(ph, fp),
                "localization_phaseless": run.score(ph, scene),
                "localization_fullphase": run.score(fp, scene),
                "decomposition_residual": float(np.max(np.abs(ph.values - recon)) / peak) if peak else 0.0,
            }
            recs.append(rec)
            run.say(
                f"compare {scene.name} k={k:.6g} ncc={rec['ncc']:.4f} "
                f"maxdiff={rec['max_abs_difference']:.4f} decomposition={rec['decomposition_residual']:.1e}"
            )
        with open(run.path(f"{scene.name}_compare", "json"), "w", encoding="ascii") as fh:
            json.dump(recs, fh, indent=2, sort_keys=True)
            fh.write("\n")
        run.summary["scenes"][scene.name] = recs


def _mode_oracle(run):
    cfg = run.cfg
    if cfg.oracle_points is not None:
        pts = np.asarray(cfg.oracle_points, dtype=float)
    else:
        pts = (cfg.oracle_grid or run.need_grid()).points()
    for scene in cfg.scenes:
        recs = []
        for i, k in enumerate(cfg.wavenumbers):
            theory = theoretical_image(scene.curves, scene.bc, k, pts, min_per_wavelength=cfg.min_per_wavelength)
            rtm = imaging_values(cfg.survey, k, corrected_data(run.synth(scene, k)).delta, pts)
            t_n = theory / np.max(np.abs(theory))
            r_n = rtm / np.max(np.abs(rtm))
            path = run.path(run.tag(scene, i) + "_oracle", "csv")
            with open(path, "w", encoding="ascii", newline="\n") as fh:
                fh.write("x,y,theory,rtm\n")
                for (x, y), a, b in zip(pts, theory, rtm):
                    fh.write(f"{x:.17g},{y:.17g},{a:.17g},{b:.17g}\n")
            rec = {"k": k, "max_normalized_gap": float(np.max(np.abs(t_n - r_n))), "file": os.path.basename(path)}
            recs.append(rec)
            run.say(f"oracle {scene.name} k={k:.6g} max normalized gap={rec['max_normalized_gap']:.4f}")
        run.summary["scenes"][scene.name] = recs


def _mode_noise_sweep(run):
    cfg = run.cfg
    grid = run.need_grid()
    levels = cfg.mu or [0.0]
    for scene in cfg.scenes:
        clean = _datasets(run, scene)
        reports, lines, rec = [], [], []
        for j, mu in enumerate(levels):
            images = []
            for i, ds in enumerate(clean):
                noisy = add_noise(ds.magnitude, mu, noise_generator(cfg.seed, j, i))
                rep = noise_metrics(ds.magnitude, noisy, mu)
                reports.append(rep)
                lines.append((2 * np.pi / ds.k, rep))
                images.append(rtm_image_phaseless(ds.with_magnitude(noisy), grid))
            final = images[0] if len(images) == 1 else multifrequency_stack(images)
            run.save_image(final, f"{scene.name}_mu{mu:g}")
            rec.append({"mu": mu, "localization": run.score(final, scene)})
            run.say(f"noise-sweep {scene.name} mu={mu:g} localization={rec[-1]['localization']}")
        path = run.path(f"{scene.name}_noise", "txt")
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            if len(clean) == 1:
                fh.write(format_noise_table(reports))
            else:
                fh.write("wavelength " + format_noise_table([]).splitlines()[0] + "\n")
                for lam, rep in lines:
                    fh.write(f"{lam:<10.6f} {rep.row()}\n")
        run.summary["scenes"][scene.name] = rec


_DISPATCH = {
    "synth": _mode_synth,
    "image": _mode_image,
    "compare": _mode_compare,
    "oracle": _mode_oracle,
    "noise-sweep": _mode_noise_sweep,
}


def run_experiment(cfg, mode, out=None):
    """Run one mode of an experiment; files go to ``cfg.out_dir``.

    Returns the summary dictionary that is also written to
    ``<out_dir>/<name>_<mode>_summary.json``.
    """
    if mode not in _DISPATCH:
        raise ValueError(f"unknown mode {mode!r}")
    run = _Run(cfg, out or sys.stdout)
    _DISPATCH[mode](run)
    run.summary["mode"] = mode
    with open(run.path(f"{cfg.name}_{mode}_summary", "json"), "w", encoding="ascii") as fh:
        json.dump(run.summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return run.summary
