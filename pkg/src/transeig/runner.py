"""Configuration-driven experiments: mesh, assemble, solve, analyze, emit.

``run_experiment`` executes the full pipeline for one RunConfig and writes
eigenvalue/delta/rate CSVs, per-mode VTK fields, log-log SVG plots and a
manifest with sha256 hashes of every artifact. Reruns with an identical
configuration reproduce every file bitwise (the eigensolver start vector
is a fixed seed).
"""

import hashlib
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import ConfigError
from .analysis import (DeltaSeries, FeatureSpec, delta_profiles, fit_rate,
                       local_mesh_size, radii_schedule, spectral_checks)
from .assembly import assemble_blocks, build_pencil, full_mass, to_vertex_order
from .config import RunConfig
from .expressions import parse_index
from .geometry import builtin_domain, enclosing_circle, polyline
from .meshing import mesh_cube, mesh_domain, partition_dofs, refine_uniform
from .problem import check_index
from .plots import plot_loglog
from .radial import ball_first_te, disk_first_te
from .solver import (SearchWindow, dirichlet_lambda1, normalize,
                     search_lower_bound, shift_invert_arnoldi)
from .vtk_io import write_mode_vtk

_CUBE_VERTEX = (-0.5, -0.5, -0.5)
_CUBE_EDGE = ((-0.5, -0.5, -0.5), (-0.5, -0.5, 0.5))


@dataclass
class RunArtifacts:
    """Everything an experiment produced."""
    outdir: Path
    files: dict               # name -> sha256
    eigenpairs: list
    rates: list               # (mode, feature label, field, RateFit)
    spectral: object
    mesh: object
    timings: dict


class StageError(RuntimeError):
    """An error tagged with the pipeline stage that raised it."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


def _fmt(x):
    return format(float(x), ".17g")


def _build_mesh(cfg: RunConfig):
    if cfg.domain_name == "cube":
        h = cfg.h / (2 ** cfg.refinements)
        return None, mesh_cube(h)
    spec = builtin_domain(cfg.domain_name, cfg.domain_params)
    mesh = mesh_domain(spec, cfg.h)
    for _ in range(cfg.refinements):
        mesh = refine_uniform(mesh, spec)
    return spec, mesh


def _resolve_features(cfg: RunConfig, spec, mesh):
    """Feature list: spec corners in 2D; the representative vertex and edge
    in the cube (all 8/12 are equivalent by symmetry)."""
    if cfg.features == "auto":
        if cfg.domain_name == "cube":
            return [FeatureSpec("corner", point=_CUBE_VERTEX, label="vertex"),
                    FeatureSpec("edge", endpoints=_CUBE_EDGE, label="edge")]
        return [FeatureSpec("corner", point=c.point, opening_angle=c.opening_angle,
                            label=f"P{j + 1}")
                for j, c in enumerate(spec.corners)]
    feats = []
    for raw in cfg.features:
        kind, _, rest = raw.partition(":")
        vals = [float(t) for t in rest.replace(",", " ").split()]
        if kind == "corner":
            if spec is not None:
                match = [c for c in spec.corners
                         if math.dist(c.point, vals[:2]) < 1e-9]
                om = match[0].opening_angle if match else None
            else:
                om = None
            feats.append(FeatureSpec("corner", point=tuple(vals[:2]) if len(vals) == 2
                                     else tuple(vals), opening_angle=om,
                                     label=f"corner({rest})"))
        elif kind == "edge":
            if len(vals) != 6:
                raise ConfigError(f"edge feature needs 6 coordinates, got {raw!r}")
            feats.append(FeatureSpec("edge", endpoints=(tuple(vals[:3]), tuple(vals[3:])),
                                     label=f"edge({rest})"))
        else:
            raise ConfigError(f"unknown feature kind in {raw!r}")
    return feats


def _auto_window(cfg, spec, mesh, n_min, n_max):
    if cfg.k_min != "auto":
        return SearchWindow(k_min=cfg.k_min, k_max=cfg.k_max,
                            sigma=cfg.sigma, count=cfg.count)
    try:
        lam1 = dirichlet_lambda1(mesh)
        if cfg.domain_name == "cube":
            R = math.sqrt(3.0) / 2.0
            lam_ball = ball_first_te(n_max if n_min > 1 else n_min)
        else:
            pts, _, _, _ = polyline(spec, max(mesh.h, spec.diameter() / 256))
            _, R = enclosing_circle(pts)
            lam_ball = disk_first_te(n_max if n_min > 1 else n_min)
        bound = search_lower_bound(n_min, n_max, R, lam1, lam_ball)
    except ValueError as exc:
        raise ConfigError(f"k_min = auto unavailable: {exc}") from exc
    if bound >= cfg.k_max:
        raise ConfigError(f"computed lower bound {bound:.4g} reaches k_max={cfg.k_max}; "
                          "widen the window")
    return SearchWindow(k_min=bound, k_max=cfg.k_max, sigma=cfg.sigma, count=cfg.count)


def run_experiment(cfg: RunConfig) -> RunArtifacts:
    """Execute one experiment end to end.

    Any stage failure is re-raised as StageError; artifacts written before
    the failure are kept with a ``.partial`` suffix.
    """
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    timings = {}
    written = []

    def stage(name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            result = fn(*args, **kwargs)
        except Exception as exc:
            for f in written:
                p = outdir / f
                if p.exists():
                    p.rename(p.with_name(p.name + ".partial"))
            raise StageError(name, exc) from exc
        timings[name] = time.perf_counter() - t0
        return result

    spec, mesh = stage("mesh", _build_mesh, cfg)

    def do_assemble():
        index = parse_index(cfg.index_text)
        n_min, n_max = check_index(index, mesh)
        part = partition_dofs(mesh)
        blocks = assemble_blocks(mesh, part, index)
        pencil = build_pencil(blocks)
        return index, n_min, n_max, part, blocks, pencil

    index, n_min, n_max, part, blocks, pencil = stage("assemble", do_assemble)

    def do_solve():
        window = _auto_window(cfg, spec, mesh, n_min, n_max)
        pairs = shift_invert_arnoldi(pencil.a, pencil.b, window,
                                     tol=cfg.tol, pencil=pencil)
        m1 = full_mass(blocks)
        pairs = [normalize(p, m1) for p in pairs]
        report = spectral_checks([p.k for p in pairs])
        return window, pairs, report

    window, pairs, report = stage("solve", do_solve)

    def do_analyze():
        feats = _resolve_features(cfg, spec, mesh)
        all_series = []
        all_rates = []
        for feat in feats:
            if cfg.radii is not None:
                radii = tuple(r for r in cfg.radii
                              if r > 2 * local_mesh_size(mesh, feat))
                if len(radii) < len(cfg.radii):
                    import warnings
                    warnings.warn(f"feature {feat.label}: dropped radii below "
                                  "mesh resolution", stacklevel=2)
            else:
                radii = radii_schedule(mesh, feat)
            if len(radii) == 0:
                continue
            # one sweep over the elements serves every mode and field
            batch = {}
            for mi, pair in enumerate(pairs):
                vecs = {"u0": pair.u0, "u": pair.u, "diff": pair.u - pair.u0}
                for fname in cfg.fields:
                    batch[(mi, fname)] = to_vertex_order(part, vecs[fname])
            profiles = delta_profiles(mesh, batch, feat, radii)
            for (mi, fname), deltas in profiles.items():
                series = DeltaSeries(feature=feat, mode=mi, field=fname,
                                     radii=tuple(radii), deltas=tuple(deltas))
                all_series.append(series)
                try:
                    all_rates.append((mi, feat.label, fname, fit_rate(series)))
                except ValueError:
                    pass          # too few usable samples; series still reported
        all_series.sort(key=lambda s: (s.feature.label, s.mode, s.field))
        all_rates.sort(key=lambda t: (t[1], t[0], t[2]))
        return feats, all_series, all_rates

    feats, all_series, all_rates = stage("analyze", do_analyze)

    def do_emit():
        # eigenvalues
        rows = ["index,re_k,im_k,multiplicity,residual"]
        for i, p in enumerate(pairs):
            rows.append(f"{i},{_fmt(p.k.real)},{_fmt(p.k.imag)},"
                        f"{p.multiplicity},{_fmt(p.residual)}")
        (outdir / "eigs.csv").write_text("\n".join(rows) + "\n")
        written.append("eigs.csv")

        # delta samples
        rows = ["mode,feature_id,field,r,delta"]
        for s in all_series:
            for r, d in zip(s.radii, s.deltas):
                rows.append(f"{s.mode},{s.feature.label},{s.field},{_fmt(r)},{_fmt(d)}")
        (outdir / "delta.csv").write_text("\n".join(rows) + "\n")
        written.append("delta.csv")

        # rates
        rows = ["mode,feature_id,field,slope,amplitude,r2,class"]
        for mi, label, fname, fit in all_rates:
            rows.append(f"{mi},{label},{fname},{_fmt(fit.slope)},"
                        f"{_fmt(fit.amplitude)},{_fmt(fit.r_squared)},"
                        f"{fit.classification}")
        (outdir / "rates.csv").write_text("\n".join(rows) + "\n")
        written.append("rates.csv")

        # per-mode fields
        for mi, p in enumerate(pairs):
            name = f"mode_{mi:02d}.vtk"
            write_mode_vtk(outdir / name, mesh,
                           to_vertex_order(part, p.u0), to_vertex_order(part, p.u),
                           title=f"mode {mi} k={p.k:.6g}")
            written.append(name)

        # log-log plots per field
        for fname in cfg.fields:
            series = [s for s in all_series if s.field == fname]
            if not series:
                continue
            plotted = []
            for s in series:
                fit = next((f for m, lbl, fn, f in all_rates
                            if m == s.mode and lbl == s.feature.label and fn == fname),
                           None)
                if any(d > 0 for d in s.deltas):
                    plotted.append((f"mode {s.mode} {s.feature.label}",
                                    s.radii, s.deltas,
                                    fit.slope if fit else None))
            if not plotted:
                continue
            name = f"delta_{fname}.svg"
            plot_loglog(plotted, outdir / name, xlabel="r", ylabel="delta",
                        title=f"{cfg.domain_name}: {fname}")
            written.append(name)

        files = {}
        for name in sorted(written):
            files[name] = hashlib.sha256((outdir / name).read_bytes()).hexdigest()
        manifest = {
            "package": "transeig",
            "version": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "config": cfg.source_text or repr(cfg),
            "window": {"k_min": window.k_min, "k_max": window.k_max,
                       "sigma": window.sigma, "count": window.count},
            "files": files,
            "timings": {k: round(v, 3) for k, v in timings.items()},
        }
        (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2,
                                                         sort_keys=True) + "\n")
        return files

    files = stage("emit", do_emit)
    return RunArtifacts(outdir=outdir, files=files, eigenpairs=pairs,
                        rates=all_rates, spectral=report, mesh=mesh,
                        timings=timings)
