"""Command line interface.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import sys

from . import __version__
from .errors import ConfigError, MeshingError, SolverError


def _cmd_run(args):
    from .config import parse_config
    from .runner import run_experiment
    cfg = parse_config(args.config)
    art = run_experiment(cfg)
    print(f"wrote {len(art.files)} artifacts to {art.outdir}")
    for i, p in enumerate(art.eigenpairs):
        print(f"  k[{i}] = {p.k.real:.6f} {p.k.imag:+.6f}i  "
              f"mult={p.multiplicity} res={p.residual:.2e}")
    return 0


def _cmd_oracle(args):
    from .radial import ball_first_te, disk_first_te, roots_by_order
    first = disk_first_te(args.n) if args.shape == "disk" else ball_first_te(args.n)
    print(f"first transmission eigenvalue ({args.shape}, n={args.n}): {first:.12f}")
    if args.csv:
        rows = ["m,k_root"]
        dim = 2 if args.shape == "disk" else 3
        for m, root in roots_by_order(args.n, dim=dim, mmax=args.mmax,
                                      cap=max(10.0, 2 * first)):
            rows.append(f"{m},{format(root, '.17g')}")
        with open(args.csv, "w") as fh:
            fh.write("\n".join(rows) + "\n")
        print(f"wrote {args.csv}")
    return 0


def _cmd_mesh(args):
    from .config import parse_config
    from .runner import _build_mesh
    from .vtk_io import write_vtk
    cfg = parse_config(args.config)
    _, mesh = _build_mesh(cfg)
    print(f"{mesh.num_vertices} vertices, {mesh.num_elements} elements, "
          f"measure {abs(mesh.measures()).sum():.8f}")
    if args.export:
        write_vtk(args.export, mesh, title=f"mesh {cfg.domain_name}")
        print(f"wrote {args.export}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="transeig")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("config")
    p_run.set_defaults(fn=_cmd_run)

    p_oracle = sub.add_parser("oracle", help="semi-analytic disk/ball eigenvalue")
    p_oracle.add_argument("shape", choices=("disk", "ball"))
    p_oracle.add_argument("--n", type=float, required=True)
    p_oracle.add_argument("--mmax", type=int, default=20)
    p_oracle.add_argument("--csv", default=None, help="write per-order roots here")
    p_oracle.set_defaults(fn=_cmd_oracle)

    p_mesh = sub.add_parser("mesh", help="build the mesh for a config")
    p_mesh.add_argument("config")
    p_mesh.add_argument("--export", default=None, help="write legacy VTK here")
    p_mesh.set_defaults(fn=_cmd_mesh)

    p_ver = sub.add_parser("version", help="print the package version")
    p_ver.set_defaults(fn=lambda a: print(__version__) or 0)

    args = parser.parse_args(argv)
    try:
        return args.fn(args) or 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (MeshingError, SolverError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # stage-tagged or unexpected
        cause = getattr(exc, "cause", None)
        if isinstance(cause, ConfigError) or isinstance(exc, ValueError):
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
