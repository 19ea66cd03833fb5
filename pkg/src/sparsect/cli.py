"""Batch driver for the reconstruction experiment grid.

One INI config file describes the geometry, noise, solver, and sweep
blocks; ``sparsect sweep`` runs the whole grid (methods x views x p) and
writes per-case images (raw + 16-bit PGM preview), per-run convergence
traces, an append-only metrics.csv, and a manifest capturing the
resolved configuration.  The remaining subcommands are thin wrappers
over the same module operations, so piping them by hand reproduces the
sweep outputs bit for bit.

Per-case noise seeds are ``base_seed + case_index`` with cases numbered
in config order; all methods within a case share the same noisy
sinogram.  Exit codes: 0 success, 1 config error, 2 numerical
divergence.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, NumericalDivergenceError
from .fbp import fbp_reconstruct
from .geometry import FAN, PARALLEL, Image, ScanGeometry, Sinogram, fan_geometry, parallel_geometry
from .linsolve import CgConfig, Initializer
from .metrics import mae_rmse, psnr, ssim
from .phantom import RNG_ALGORITHM, NoiseSpec, add_noise, shepp_logan
from .projector import forward_project
from .rawio import read_initializer, read_raw, write_pgm, write_raw
from .solver import SolverConfig, reconstruct

METHODS = ("fbp", "hqs", "ihqs", "ihqs-init")
METRICS_HEADER = "method,views,noise,p,alpha,beta,psnr,ssim,mae,rmse,iters,wall_seconds"


def _fmt(x: float) -> str:
    """Shortest round-trip decimal form, deterministic across runs."""
    return repr(float(x))


# ---------------------------------------------------------------------------
# config parsing


class _Section:
    def __init__(self, parser: configparser.ConfigParser, name: str):
        self._name = name
        self._raw = dict(parser[name]) if parser.has_section(name) else {}

    def _get(self, key, cast, default, required=False):
        field = f"{self._name}.{key}"
        if key not in self._raw or self._raw[key].strip() == "":
            if required:
                raise ConfigError(field, "missing required value")
            return default
        try:
            return cast(self._raw[key].strip())
        except (TypeError, ValueError):
            raise ConfigError(field, f"cannot parse {self._raw[key]!r}") from None

    def get_float(self, key, default=None, required=False):
        return self._get(key, float, default, required)

    def get_int(self, key, default=None, required=False):
        return self._get(key, int, default, required)

    def get_str(self, key, default=None, required=False):
        return self._get(key, str, default, required)

    def get_list(self, key, cast, default):
        raw = self.get_str(key)
        if raw is None:
            return default
        field = f"{self._name}.{key}"
        try:
            items = [cast(tok.strip()) for tok in raw.split(",") if tok.strip()]
        except (TypeError, ValueError):
            raise ConfigError(field, f"cannot parse list {raw!r}") from None
        if not items:
            raise ConfigError(field, "list is empty")
        return items


class ExperimentConfig:
    """Validated view of one experiment INI file."""

    def __init__(self, path):
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError("config", f"parse failure: {exc}") from None

        geo = _Section(parser, "geometry")
        self.beam = geo.get_str("beam", PARALLEL)
        if self.beam not in (PARALLEL, FAN):
            raise ConfigError("geometry.beam", f"must be '{PARALLEL}' or '{FAN}'")
        self.image_size = geo.get_int("image_size", required=True)
        if self.image_size < 16:
            raise ConfigError("geometry.image_size", "must be at least 16")
        self.pixel_size = geo.get_float("pixel_size", 20.0 / self.image_size)
        self.num_views = geo.get_int("num_views", 90)
        self.num_bins = geo.get_int("num_bins")
        self.fov_radius = geo.get_float("fov_radius")
        self.source_to_center = geo.get_float("source_to_center")
        self.source_to_detector = geo.get_float("source_to_detector")

        noise = _Section(parser, "noise")
        self.gaussian_sigma = noise.get_float("gaussian_sigma", 0.0)
        self.poisson_i0 = noise.get_float("poisson_i0")
        if self.gaussian_sigma < 0:
            raise ConfigError("noise.gaussian_sigma", "must be >= 0")
        if self.poisson_i0 is not None and self.poisson_i0 <= 0:
            raise ConfigError("noise.poisson_i0", "must be positive")

        sol = _Section(parser, "solver")
        self.p = sol.get_float("p", 0.7)
        self.lam = sol.get_float("lambda", 6e-4)
        gamma_list = sol.get_list("gamma", float, [0.2])
        if len(gamma_list) not in (1, 9):
            raise ConfigError("solver.gamma", "must be one weight or nine per-channel weights")
        self.gamma = gamma_list[0] if len(gamma_list) == 1 else tuple(gamma_list)
        self.alpha = sol.get_float("alpha", 0.5)
        self.beta = sol.get_float("beta", 0.6)
        self.epsilon = sol.get_float("epsilon", 1e-4)
        self.max_iter = sol.get_int("max_iter", 200)
        self.cg_tol = sol.get_float("cg_tol", 1e-6)
        self.cg_max_iter = sol.get_int("cg_max_iter", 200)
        self.initializer = sol.get_str("initializer", "identity")
        self.fbp_window = sol.get_str("fbp_window", "ramlak")
        if self.fbp_window not in ("ramlak", "hann"):
            raise ConfigError("solver.fbp_window", "must be 'ramlak' or 'hann'")

        sweep = _Section(parser, "sweep")
        self.views_list = sweep.get_list("views", int, [self.num_views])
        self.p_list = sweep.get_list("p_values", float, [self.p])
        self.methods = sweep.get_list("methods", str, ["fbp", "ihqs"])
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError("sweep.methods", f"unknown method {m!r}; expected {METHODS}")

        out = _Section(parser, "output")
        self.directory = out.get_str("directory", "results")
        self.seed = out.get_int("seed", 0)
        self.peak = out.get_float("peak", 1.0)

        try:
            self.solver_config(self.p)
        except ValueError as exc:
            raise ConfigError("solver", str(exc)) from None

    def geometry(self, num_views: int | None = None) -> ScanGeometry:
        views = self.num_views if num_views is None else num_views
        try:
            if self.beam == FAN:
                return fan_geometry(
                    self.image_size,
                    views,
                    num_bins=self.num_bins,
                    pixel_size=self.pixel_size,
                    fov_radius=self.fov_radius,
                    source_to_center=self.source_to_center,
                    source_to_detector=self.source_to_detector,
                )
            return parallel_geometry(
                self.image_size,
                views,
                num_bins=self.num_bins,
                pixel_size=self.pixel_size,
                fov_radius=self.fov_radius,
            )
        except ValueError as exc:
            raise ConfigError("geometry", str(exc)) from None

    def noise_spec(self, seed: int) -> NoiseSpec:
        return NoiseSpec(self.gaussian_sigma, self.poisson_i0, seed)

    def load_initializer(self) -> Initializer:
        if self.initializer == "identity":
            return Initializer()
        return read_initializer(self.initializer)

    def solver_config(self, p: float, method: str = "ihqs") -> SolverConfig:
        alpha, beta = self.alpha, self.beta
        if method == "hqs":
            alpha = beta = 0.0
        init = self.load_initializer() if method == "ihqs-init" else Initializer()
        return SolverConfig(
            p=p,
            lam=self.lam,
            gamma=self.gamma,
            alpha=alpha,
            beta=beta,
            epsilon=self.epsilon,
            max_iter=self.max_iter,
            cg=CgConfig(self.cg_tol, self.cg_max_iter),
            initializer=init,
        )

    def resolved(self) -> dict:
        keys = (
            "beam image_size pixel_size num_views num_bins fov_radius source_to_center "
            "source_to_detector gaussian_sigma poisson_i0 p lam gamma alpha beta epsilon "
            "max_iter cg_tol cg_max_iter initializer views_list p_list methods directory "
            "seed peak"
        ).split()
        return {k: getattr(self, k) for k in keys}


# ---------------------------------------------------------------------------
# experiment runner


def _case_tag(method: str, views: int, p: float | None) -> str:
    return f"{method}_v{views}" + (f"_p{p:g}" if p is not None else "")


def _run_case(cfg: ExperimentConfig, views: int, case_seed: int, out_dir: Path, timing: bool):
    """All methods for one (views, noise seed) case; returns metrics rows."""
    truth = shepp_logan(cfg.image_size, pixel_size=cfg.pixel_size)
    geom = cfg.geometry(views)
    spec = cfg.noise_spec(case_seed)
    noisy = add_noise(forward_project(truth, geom), spec)
    rows = []
    for method in cfg.methods:
        p_values = [None] if method == "fbp" else cfg.p_list
        for p in p_values:
            t0 = time.perf_counter()
            if method == "fbp":
                rec = fbp_reconstruct(noisy, geom, window=cfg.fbp_window)
                iters = 0
            else:
                solver_cfg = cfg.solver_config(p, method)
                rec, trace = reconstruct(noisy, geom, solver_cfg, ground_truth=truth)
                iters = trace.iterations
            wall = time.perf_counter() - t0
            tag = _case_tag(method, views, p)
            write_raw(out_dir / f"{tag}.raw", rec.data)
            write_pgm(out_dir / f"{tag}.pgm", rec.data, cfg.peak)
            if method != "fbp":
                trace.write_csv(out_dir / f"trace_{tag}.csv")
            ps = psnr(rec, truth, cfg.peak)
            ss = ssim(rec, truth, cfg.peak)
            mae, rmse = mae_rmse(rec, truth)
            rows.append(
                ",".join(
                    [
                        method,
                        str(views),
                        spec.label,
                        "" if p is None else _fmt(p),
                        "" if method == "fbp" else _fmt(0.0 if method == "hqs" else cfg.alpha),
                        "" if method == "fbp" else _fmt(0.0 if method == "hqs" else cfg.beta),
                        _fmt(ps),
                        _fmt(ss),
                        _fmt(mae),
                        _fmt(rmse),
                        str(iters),
                        f"{wall:.3f}" if timing else "",
                    ]
                )
            )
    return rows


def run_experiment(
    config_path,
    out_dir=None,
    jobs: int = 1,
    seed: int | None = None,
    timing: bool = False,
) -> int:
    """Execute the full sweep described by a config file."""
    cfg = ExperimentConfig(config_path)
    if seed is not None:
        cfg.seed = seed
    out = Path(out_dir if out_dir is not None else cfg.directory)
    out.mkdir(parents=True, exist_ok=True)

    manifest = {
        "package": f"sparsect {__version__}",
        "rng": RNG_ALGORITHM,
        "config": cfg.resolved(),
        "case_seed_rule": "base_seed + case_index (cases in config views order)",
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    cases = [(views, cfg.seed + i) for i, views in enumerate(cfg.views_list)]
    with open(out / "metrics.csv", "w") as fh:
        fh.write(METRICS_HEADER + "\n")
        if jobs <= 1:
            for views, case_seed in cases:
                for row in _run_case(cfg, views, case_seed, out, timing):
                    fh.write(row + "\n")
                fh.flush()
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [
                    pool.submit(_run_case, cfg, views, case_seed, out, timing)
                    for views, case_seed in cases
                ]
                for fut in futures:  # submission order keeps the file deterministic
                    for row in fut.result():
                        fh.write(row + "\n")
                    fh.flush()
    return 0


# ---------------------------------------------------------------------------
# subcommands


def _load_image(path, pixel_size: float) -> Image:
    return Image(read_raw(path), pixel_size)


def _cmd_phantom(args) -> int:
    img = shepp_logan(args.size, pixel_size=args.pixel_size)
    write_raw(args.out, img.data)
    return 0


def _cmd_project(args) -> int:
    cfg = ExperimentConfig(args.config)
    geom = cfg.geometry(args.views)
    img = _load_image(args.image, cfg.pixel_size)
    write_raw(args.out, forward_project(img, geom).data)
    return 0


def _cmd_addnoise(args) -> int:
    cfg = ExperimentConfig(args.config)
    geom = cfg.geometry(args.views)
    sino = Sinogram(read_raw(args.infile), geom.view_angles)
    noisy = add_noise(sino, cfg.noise_spec(args.seed if args.seed is not None else cfg.seed))
    write_raw(args.out, noisy.data)
    return 0


def _cmd_fbp(args) -> int:
    cfg = ExperimentConfig(args.config)
    geom = cfg.geometry(args.views)
    sino = Sinogram(read_raw(args.sino), geom.view_angles)
    rec = fbp_reconstruct(sino, geom, window=cfg.fbp_window)
    write_raw(args.out, rec.data)
    if args.pgm:
        write_pgm(args.pgm, rec.data, cfg.peak)
    return 0


def _cmd_reconstruct(args) -> int:
    cfg = ExperimentConfig(args.config)
    geom = cfg.geometry(args.views)
    sino = Sinogram(read_raw(args.sino), geom.view_angles)
    solver_cfg = cfg.solver_config(args.p if args.p is not None else cfg.p, args.method)
    truth = _load_image(args.gt, cfg.pixel_size) if args.gt else None
    rec, trace = reconstruct(sino, geom, solver_cfg, ground_truth=truth)
    write_raw(args.out, rec.data)
    if args.pgm:
        write_pgm(args.pgm, rec.data, cfg.peak)
    if args.trace:
        trace.write_csv(args.trace)
    return 0


def _cmd_metrics(args) -> int:
    x = Image(read_raw(args.image))
    ref = Image(read_raw(args.ref))
    mae, rmse = mae_rmse(x, ref)
    print("psnr,ssim,mae,rmse")
    print(
        ",".join(
            [_fmt(psnr(x, ref, args.peak)), _fmt(ssim(x, ref, args.peak)), _fmt(mae), _fmt(rmse)]
        )
    )
    return 0


def _cmd_sweep(args) -> int:
    return run_experiment(args.config, args.out, args.jobs, args.seed, args.timing)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are config errors (exit 1)
        raise ConfigError("cli", message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sparsect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="write a Shepp-Logan phantom raw file")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--pixel-size", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_phantom)

    p = sub.add_parser("project", help="forward-project an image raw file")
    p.add_argument("--config", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--views", type=int, default=None)
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("addnoise", help="degrade a sinogram per the noise block")
    p.add_argument("--config", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--views", type=int, default=None)
    p.set_defaults(func=_cmd_addnoise)

    p = sub.add_parser("fbp", help="filtered backprojection of a sinogram")
    p.add_argument("--config", required=True)
    p.add_argument("--sino", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pgm", default=None)
    p.add_argument("--views", type=int, default=None)
    p.set_defaults(func=_cmd_fbp)

    p = sub.add_parser("reconstruct", help="iterative reconstruction of a sinogram")
    p.add_argument("--config", required=True)
    p.add_argument("--sino", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=[m for m in METHODS if m != "fbp"], default="ihqs")
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--views", type=int, default=None)
    p.add_argument("--pgm", default=None)
    p.add_argument("--trace", default=None)
    p.add_argument("--gt", default=None)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("metrics", help="quality metrics between two raw images")
    p.add_argument("--image", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--peak", type=float, default=1.0)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("sweep", help="run the full experiment grid from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument(
        "--timing",
        action="store_true",
        help="fill the wall_seconds column (makes metrics.csv non-reproducible)",
    )
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalDivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
