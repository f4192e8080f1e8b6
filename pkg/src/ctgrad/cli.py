"""Command line interface: ``ctgrad <subcommand> ...``.

Every subcommand is a thin composition of library calls.  Outputs are
written only after the computation succeeds; if writing fails midway the
files already written by that invocation are removed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from contextlib import contextmanager
from pathlib import Path

from . import __version__
from ._validation import check_grid_spec
from .core import AngleSet, DetectorGrid, EdgeMap, GeometryError, GradientField, GridSpec, gradient_magnitude
from .edges import canny_from_gradient, edge_f1
from .experiment import SparseViewConfig, metrics_csv, run_sparse_view
from .fileio import (
    FormatError,
    export_view,
    import_sinogram_csv,
    read_edge_map,
    read_image,
    read_sinogram,
    sidecar_path,
    write_edge_map,
    write_image,
    write_sinogram,
)
from .method1 import fbp_reconstruct, method1_gradient_combined, method1_gradient_preprocess
from .method2 import IstaConfig, method2_gradient
from .phantom import (
    add_noise,
    analytic_sinogram,
    ellipse_outline,
    phantom_specs,
    rasterize,
    subsample_angles,
)
from .projector import forward_radon

logger = logging.getLogger("ctgrad")

THREADS_ENV = "CTGRAD_THREADS"
# Method 1 / Method 2 smoothing scales in pixels when --epsilon is omitted
DEFAULT_EPSILON = {"fbp-preprocess": 3.0, "fbp-combined": 3.0, "l1": 6.0}


class _Outputs:
    """Tracks files written by one command so they can be removed on failure."""

    def __init__(self):
        self.paths = []

    def add(self, path):
        path = os.fspath(path)
        self.paths.append(path)
        return path


@contextmanager
def _transaction():
    outputs = _Outputs()
    try:
        yield outputs
    except BaseException:
        for path in outputs.paths:
            for p in (path, sidecar_path(path)):
                try:
                    os.remove(p)
                except FileNotFoundError:
                    pass
        raise


def _resolve_threads(value):
    if value is None:
        value = int(os.environ.get(THREADS_ENV, "0"))
    if value < 0:
        raise ValueError(f"--threads must be >= 0, got {value}")
    return value or (os.cpu_count() or 1)


def _write_image_or_view(img, path, out: _Outputs):
    if str(path).lower().endswith(".pgm"):
        export_view(img, out.add(path))
    else:
        write_image(img, out.add(path))


# -- subcommands ------------------------------------------------------------


def cmd_phantom(args):
    spec = GridSpec(args.size, args.pixel_size)
    img = rasterize(phantom_specs(args.type, spec), spec)
    with _transaction() as out:
        _write_image_or_view(img, args.out, out)


def cmd_project(args):
    if (args.img is None) == (args.analytic is None):
        raise ValueError("give exactly one of --img or --analytic")
    if args.img is not None:
        img = read_image(args.img)
        spec = img.spec
    else:
        spec = GridSpec(args.size, args.pixel_size)
    s_spacing = spec.pixel_size if args.s_spacing is None else args.s_spacing
    if args.n_s is None:
        detector = DetectorGrid.for_grid(spec, s_spacing)
    else:
        detector = DetectorGrid(args.n_s, s_spacing)
    angles = AngleSet.even(args.n_angles)
    if args.analytic is not None:
        detector.check_covers(spec)
        sino = analytic_sinogram(phantom_specs(args.analytic, spec), angles, detector)
    else:
        sino = forward_radon(img, angles, detector)
    with _transaction() as out:
        write_sinogram(sino, out.add(args.out))


def cmd_subsample(args):
    sino = subsample_angles(read_sinogram(args.inp), args.keep_every)
    with _transaction() as out:
        write_sinogram(sino, out.add(args.out))


def cmd_noise(args):
    sino = add_noise(read_sinogram(args.inp), args.sigma_frac, args.seed)
    with _transaction() as out:
        write_sinogram(sino, out.add(args.out))


def cmd_import_csv(args):
    sino = import_sinogram_csv(args.csv, args.s_spacing)
    with _transaction() as out:
        write_sinogram(sino, out.add(args.out))


def cmd_fbp(args):
    sino = read_sinogram(args.sino)
    spec = check_grid_spec(sino, args.size, args.pixel_size)
    img = fbp_reconstruct(sino, spec, args.cutoff)
    with _transaction() as out:
        _write_image_or_view(img, args.out, out)


def _diag_csv(results) -> str:
    lines = ["iteration,objective_gx,objective_gy"]
    ox, oy = results[0].objective, results[1].objective
    for k in range(max(len(ox), len(oy))):
        a = repr(ox[k]) if k < len(ox) else ""
        b = repr(oy[k]) if k < len(oy) else ""
        lines.append(f"{k},{a},{b}")
    return "\n".join(lines) + "\n"


def cmd_grad(args):
    sino = read_sinogram(args.sino)
    spec = check_grid_spec(sino, args.size, args.pixel_size)
    eps_px = DEFAULT_EPSILON[args.method] if args.epsilon is None else args.epsilon
    eps = eps_px * spec.pixel_size
    threads = _resolve_threads(args.threads)
    diags = None
    if args.method == "fbp-preprocess":
        gf = method1_gradient_preprocess(sino, eps, spec, args.cutoff, threads)
    elif args.method == "fbp-combined":
        gf = method1_gradient_combined(sino, eps, spec, threads)
    else:
        cfg = IstaConfig(lam=args.lam, max_iters=args.max_iters, rel_tol=args.rel_tol, seed=args.seed)
        gf, diags = method2_gradient(
            sino, eps, cfg, spec, lam_relative=args.lambda_mode == "relative", threads=threads
        )
    if args.diag and diags is None:
        raise ValueError("--diag is only available with --method l1")
    with _transaction() as out:
        write_image(gf.gx, out.add(args.out_gx))
        write_image(gf.gy, out.add(args.out_gy))
        if args.out_mag:
            _write_image_or_view(gradient_magnitude(gf), args.out_mag, out)
        if args.diag:
            Path(out.add(args.diag)).write_text(_diag_csv(diags))


def cmd_canny(args):
    gx, gy = read_image(args.gx), read_image(args.gy)
    edges = canny_from_gradient(GradientField(gx, gy), args.low, args.high)
    with _transaction() as out:
        if str(args.out).lower().endswith(".pgm"):
            export_view(edges, out.add(args.out))
        else:
            write_edge_map(edges, out.add(args.out), gx.pixel_size)


def cmd_truth(args):
    spec = GridSpec(args.size, args.pixel_size)
    edges = EdgeMap(ellipse_outline(phantom_specs(args.type, spec), spec))
    with _transaction() as out:
        write_edge_map(edges, out.add(args.out), spec.pixel_size)


def cmd_score(args):
    p, r, f1 = edge_f1(read_edge_map(args.pred), read_edge_map(args.truth), args.radius)
    print(f"precision={p:.6f} recall={r:.6f} f1={f1:.6f}")


def cmd_view(args):
    with _transaction() as out:
        export_view(read_image(args.inp), out.add(args.out))


def cmd_experiment(args):
    cfg = SparseViewConfig(
        n_angles=args.angles,
        dense_angles=args.dense_angles,
        size=args.size,
        noise=args.noise,
        seed=args.seed,
        epsilon_px=args.epsilon,
        lam_ladder=tuple(args.lambdas),
        max_iters=args.max_iters,
        low=args.low,
        high=args.high,
        match_radius=args.radius,
    )
    scores = run_sparse_view(cfg, threads=_resolve_threads(args.threads))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = GridSpec(cfg.size, cfg.pixel_size)
    truth = ellipse_outline(phantom_specs("shepp-logan", spec), spec)
    with _transaction() as out:
        Path(out.add(out_dir / "metrics.csv")).write_text(metrics_csv(scores))
        export_view(EdgeMap(truth), out.add(out_dir / "truth_edges.pgm"))
        for s in scores:
            if not s.selected:
                continue
            stem = f"{s.setting}{s.n_angles}_{s.method}"
            export_view(gradient_magnitude(s.gradient), out.add(out_dir / f"{stem}_gradmag.pgm"))
            export_view(EdgeMap(s.edges), out.add(out_dir / f"{stem}_edges.pgm"))
    for s in scores:
        flag = "*" if s.selected else " "
        print(
            f"{flag} {s.setting:6s} {s.n_angles:4d} {s.method:13s} lam={s.lam:<6g} "
            f"f1={s.f1:.4f} precision={s.precision:.4f} recall={s.recall:.4f} spurious={s.spurious:.4f}"
        )


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctgrad", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument(
        "--threads", type=int, default=None,
        help=f"worker threads, 0 = auto (default: ${THREADS_ENV} or 0)",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("phantom", help="rasterize a test phantom")
    p.add_argument("--type", choices=["shepp-logan", "disk", "ellipses"], required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--pixel-size", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("project", help="parallel-beam sinogram of an image or analytic phantom")
    p.add_argument("--img")
    p.add_argument("--analytic", choices=["shepp-logan", "disk", "ellipses"])
    p.add_argument("--size", type=int, default=128, help="grid size for --analytic")
    p.add_argument("--pixel-size", type=float, default=1.0, help="pixel size for --analytic")
    p.add_argument("--n-angles", type=int, required=True)
    p.add_argument("--n-s", type=int)
    p.add_argument("--s-spacing", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("subsample", help="keep every Q-th projection angle")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--keep-every", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_subsample)

    p = sub.add_parser("noise", help="add seeded Gaussian noise")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--sigma-frac", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("import-csv", help="convert a CSV sinogram (one row per angle)")
    p.add_argument("--csv", required=True)
    p.add_argument("--s-spacing", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_import_csv)

    p = sub.add_parser("fbp", help="filtered backprojection")
    p.add_argument("--sino", required=True)
    p.add_argument("--size", type=int)
    p.add_argument("--pixel-size", type=float)
    p.add_argument("--cutoff", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fbp)

    p = sub.add_parser("grad", help="smoothed gradient directly from a sinogram")
    p.add_argument("--method", choices=["fbp-preprocess", "fbp-combined", "l1"], required=True)
    p.add_argument("--epsilon", type=float, help="smoothing scale in pixels (default 3 for fbp-*, 6 for l1)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.01)
    p.add_argument("--lambda-mode", choices=["absolute", "relative"], default="absolute")
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cutoff", type=float, default=1.0)
    p.add_argument("--sino", required=True)
    p.add_argument("--size", type=int)
    p.add_argument("--pixel-size", type=float)
    p.add_argument("--out-gx", required=True)
    p.add_argument("--out-gy", required=True)
    p.add_argument("--out-mag")
    p.add_argument("--diag", metavar="CSV")
    p.set_defaults(func=cmd_grad)

    p = sub.add_parser("canny", help="edge map from gradient components")
    p.add_argument("--gx", required=True)
    p.add_argument("--gy", required=True)
    p.add_argument("--low", type=float, default=0.1)
    p.add_argument("--high", type=float, default=0.25)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_canny)

    p = sub.add_parser("truth", help="rasterized phantom outlines as a reference edge map")
    p.add_argument("--type", choices=["shepp-logan", "disk", "ellipses"], required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--pixel-size", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_truth)

    p = sub.add_parser("score", help="precision/recall/F1 of an edge map")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--radius", type=float, default=2.0)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("view", help="export an image as 16-bit PGM")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_view)

    p = sub.add_parser("experiment", help="reproducible experiments")
    exp = p.add_subparsers(dest="experiment", required=True, metavar="NAME")
    e = exp.add_parser("sparse-view", help="Method 1 vs Method 2 under angular undersampling")
    defaults = SparseViewConfig()
    e.add_argument("--angles", type=int, default=defaults.n_angles)
    e.add_argument("--dense-angles", type=int, default=defaults.dense_angles)
    e.add_argument("--size", type=int, default=defaults.size)
    e.add_argument("--noise", type=float, default=defaults.noise)
    e.add_argument("--seed", type=int, default=defaults.seed)
    e.add_argument("--epsilon", type=float, default=defaults.epsilon_px)
    e.add_argument("--lambdas", type=float, nargs="+", default=list(defaults.lam_ladder))
    e.add_argument("--max-iters", type=int, default=defaults.max_iters)
    e.add_argument("--low", type=float, default=defaults.low)
    e.add_argument("--high", type=float, default=defaults.high)
    e.add_argument("--radius", type=float, default=defaults.match_radius)
    e.add_argument("--out-dir", required=True)
    e.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except (FormatError, GeometryError, ValueError, OSError) as exc:
        print(f"ctgrad {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
