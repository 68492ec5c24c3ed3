"""Command-line front end.

Subcommands::

    nicorr surface    EOF / discord / concurrence / mutual information over (alpha, sigma)
    nicorr contrast   D0 intensity curve and its path or spin contrast
    nicorr fit-sigma  noise strength from a measured path contrast
    nicorr predict    strong-noise z-filtered spin contrast
    nicorr verify     cross-check suites, exit 0 iff all pass

Angles are radians everywhere in files.  Exit codes: 0 ok, 1 verification
failure, 2 I/O error, 3 degenerate computation.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .circuit import CircuitParams, NoiseModel, output_state
from .correlations import correlation_report
from .intensities import (
    SWEEP_PERIOD,
    OutOfValidityError,
    SpinFilter,
    UndefinedContrastError,
    circuit_intensity,
    closed_form_id,
    contrast_closed_form,
    contrast_numeric,
)

EXIT_OK, EXIT_VERIFY, EXIT_IO, EXIT_DEGENERATE = 0, 1, 2, 3

SURFACE_HEADER = ("alpha", "sigma", "eof", "discord", "concurrence", "mutual_info")


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{float(x):.9g}"


@dataclass(frozen=True)
class SweepSpec:
    alpha_range: tuple[float, float, int] = (0.0, 2 * math.pi, 101)
    sigma_range: tuple[float, float, int] = (0.0, 2 * math.pi, 101)
    phi: float = 0.0
    epsilon: float = 1.0
    include_uniform_row: bool = True

    def __post_init__(self):
        for name in ("alpha_range", "sigma_range"):
            start, stop, steps = getattr(self, name)
            if steps < 2 or not (math.isfinite(start) and math.isfinite(stop)):
                raise ValueError(f"{name} needs finite bounds and at least 2 steps")
        if self.sigma_range[0] < 0:
            raise ValueError("sigma must be >= 0")

    @property
    def alphas(self) -> np.ndarray:
        return np.linspace(*self.alpha_range)

    @property
    def sigmas(self) -> np.ndarray:
        return np.linspace(*self.sigma_range)


@dataclass(frozen=True)
class FitResult:
    contrast_in: float
    contrast_err: float
    sigma: float
    sigma_err: float | None


def fit_sigma(contrast: float, err: float = 0.0) -> FitResult:
    """Invert ``C = exp(-sigma^2/2)`` with first-order error propagation.

    ``sigma_err`` is None at ``contrast == 1``, where the derivative diverges.
    """
    if not 0 < contrast <= 1:
        raise ValueError(f"contrast must lie in (0, 1], got {contrast!r}")
    if err < 0:
        raise ValueError("contrast error must be >= 0")
    if contrast == 1:
        return FitResult(contrast, err, 0.0, None)
    sigma = math.sqrt(-2.0 * math.log(contrast))
    return FitResult(contrast, err, sigma, err / (contrast * sigma))


def predict(epsilon: float, filt: str = "z-down") -> float:
    """Spin contrast behind a z filter once path coherence is fully lost."""
    if not 0 <= epsilon <= 1:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    which = {"z-up": "spin_z_up_strong", "z-down": "spin_z_down_strong"}.get(filt)
    if which is None:
        raise ValueError(f"prediction only defined for z-up/z-down, got {filt!r}")
    return contrast_closed_form(which, CircuitParams(epsilon=epsilon))


def surface_rows(spec: SweepSpec, progress=None):
    """Yield ``(alpha, sigma, eof, discord, concurrence, mutual_info)`` in grid order.

    Sigma is the inner loop.  Uniform-noise rows, if requested, come last
    with ``sigma == "uniform"``.
    """
    noises = [(s, NoiseModel.gaussian(s)) for s in spec.sigmas]
    if spec.include_uniform_row:
        uniform = [("uniform", NoiseModel.uniform())]
    else:
        uniform = []
    blocks = [(a, noises) for a in spec.alphas] + [(a, uniform) for a in spec.alphas]
    for alpha, block in blocks:
        for label, noise in block:
            rho = output_state(CircuitParams(float(alpha), spec.phi, spec.epsilon, noise))
            rep = correlation_report(rho)
            yield (alpha, label, rep.eof, rep.discord, rep.concurrence, rep.mutual_info)
        if progress is not None and block:
            progress()


def manifest(command: str, args: argparse.Namespace) -> str:
    skip = {"func", "out", "command"}
    flags = " ".join(
        f"--{k.replace('_', '-')}={fmt(v) if isinstance(v, float) else v}"
        for k, v in sorted(vars(args).items())
        if k not in skip and k != "seed"
    )
    seed = getattr(args, "seed", None)
    return f"# version={__version__}, command={command}, flags={flags}, seed={seed}\n"


def _open_out(path: str | None):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def _write_csv(path: str | None, header, rows, trailer: str) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    buf.write(trailer)
    fh, close = _open_out(path)
    try:
        fh.write(buf.getvalue())
    finally:
        if close:
            fh.close()


def _noise_from_args(args) -> NoiseModel:
    if args.noise == "uniform":
        return NoiseModel.uniform()
    if args.noise == "none":
        return NoiseModel.none()
    return NoiseModel.gaussian(args.sigma)


# ------------------------------------------------------------------ commands

def cmd_surface(args) -> int:
    alpha_steps = args.alpha_steps or args.steps
    sigma_steps = args.sigma_steps or args.steps
    spec = SweepSpec(
        alpha_range=(args.alpha_min, args.alpha_max, alpha_steps),
        sigma_range=(args.sigma_min, args.sigma_max, sigma_steps),
        phi=args.phi,
        epsilon=args.epsilon,
        include_uniform_row=not args.no_uniform,
    )
    rows = list(surface_rows(spec))
    _write_csv(args.out, SURFACE_HEADER, rows, manifest("surface", args))
    return EXIT_OK


def cmd_contrast(args) -> int:
    filt = SpinFilter.named(args.filter)
    params = CircuitParams(args.alpha, args.phi, args.epsilon, _noise_from_args(args))
    sweep = "phi" if args.kind == "path" else "alpha"
    period = SWEEP_PERIOD[sweep]
    plain = circuit_intensity(sweep, params)
    filtered = circuit_intensity(sweep, params, filt)
    try:
        res = contrast_numeric(filtered, period)
    except UndefinedContrastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    which = closed_form_id(args.kind, filt)
    try:
        closed = contrast_closed_form(which, params) if which else float("nan")
    except (UndefinedContrastError, OutOfValidityError):
        closed = float("nan")
    xs = np.arange(args.steps) * (period / args.steps)
    rows = zip(xs, plain(xs), filtered(xs))
    summary = (
        f"# contrast_numeric={fmt(res.value)}, contrast_closed_form={fmt(closed)}, "
        f"argmax={fmt(res.argmax)}, argmin={fmt(res.argmin)}, "
        f"max={fmt(res.i_max)}, min={fmt(res.i_min)}\n"
    )
    _write_csv(args.out, ("sweep_param", "intensity", "intensity_filtered"), rows,
               summary + manifest("contrast", args))
    scale, unit = (180 / math.pi, "deg") if args.degrees else (1.0, "rad")
    if args.out not in (None, "-"):
        print(
            f"{args.kind} contrast ({args.filter}): numeric {res.value:.6f}, closed form {closed:.6f}; "
            f"max at {res.argmax * scale:.4f} {unit}, min at {res.argmin * scale:.4f} {unit}"
        )
    return EXIT_OK


def _read_fit_input(path: str):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]
    return [(r["label"], float(r["contrast"]), float(r["contrast_err"])) for r in rows]


def cmd_fit_sigma(args) -> int:
    if args.input:
        items = _read_fit_input(args.input)
    elif args.contrast is not None:
        items = [("input", args.contrast, args.err)]
    else:
        print("error: give --contrast or --input", file=sys.stderr)
        return EXIT_IO
    rows = []
    for label, c, e in items:
        fit = fit_sigma(c, e)
        rows.append((label, fit.contrast_in, fit.contrast_err, fit.sigma, fit.sigma_err))
    _write_csv(args.out, ("label", "contrast", "contrast_err", "sigma", "sigma_err"), rows,
               manifest("fit-sigma", args))
    return EXIT_OK


def cmd_predict(args) -> int:
    print(fmt(predict(args.epsilon, args.filter)))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suites

    ok, report = run_suites(args.level, args.seed, args.samples)
    fh, close = _open_out(args.out)
    try:
        fh.write(report)
    finally:
        if close:
            fh.close()
    return EXIT_OK if ok else EXIT_VERIFY


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nicorr", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser(
        "surface",
        help="correlation measures over a (alpha, sigma) grid",
        description=(
            "EOF, discord D(A|B), concurrence and mutual information of the output state. "
            "Defaults: phi=0, epsilon=1, alpha and sigma in [0, 2pi] with 101 steps each, "
            "plus uniform-noise rows (sigma column 'uniform')."
        ),
    )
    s.add_argument("--alpha-min", type=float, default=0.0)
    s.add_argument("--alpha-max", type=float, default=2 * math.pi)
    s.add_argument("--sigma-min", type=float, default=0.0)
    s.add_argument("--sigma-max", type=float, default=2 * math.pi)
    s.add_argument("--steps", type=int, default=101, help="grid steps for both axes")
    s.add_argument("--alpha-steps", type=int, default=None)
    s.add_argument("--sigma-steps", type=int, default=None)
    s.add_argument("--phi", type=float, default=0.0)
    s.add_argument("--epsilon", type=float, default=1.0)
    s.add_argument("--no-uniform", action="store_true", help="omit the uniform-noise rows")
    s.add_argument("--seed", type=int, default=0, help="recorded in the manifest; the surface is deterministic")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_surface)

    c = sub.add_parser("contrast", help="intensity curve and contrast at detector D0")
    c.add_argument("--kind", choices=("path", "spin"), default="path",
                   help="path: sweep phi over [0, 2pi); spin: sweep alpha over [0, 4pi)")
    c.add_argument("--filter", choices=("none", "z-up", "z-down", "x-up", "x-down"), default="none")
    c.add_argument("--alpha", type=float, default=0.0)
    c.add_argument("--phi", type=float, default=0.0)
    c.add_argument("--epsilon", type=float, default=1.0)
    c.add_argument("--noise", choices=("gaussian", "uniform", "none"), default="gaussian")
    c.add_argument("--sigma", type=float, default=0.0)
    c.add_argument("--steps", type=int, default=256, help="rows in the intensity table")
    c.add_argument("--degrees", action="store_true", help="show extremizer angles in degrees on stdout")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_contrast)

    f = sub.add_parser("fit-sigma", help="noise strength from a path contrast at alpha=0")
    f.add_argument("--contrast", type=float)
    f.add_argument("--err", type=float, default=0.0)
    f.add_argument("--input", help="CSV with columns label,contrast,contrast_err")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", default="-")
    f.set_defaults(func=cmd_fit_sigma)

    r = sub.add_parser("predict", help="strong-noise z-filtered spin contrast")
    r.add_argument("--epsilon", type=float, required=True)
    r.add_argument("--filter", choices=("z-up", "z-down"), default="z-down")
    r.set_defaults(func=cmd_predict)

    v = sub.add_parser("verify", help="run the cross-check suites")
    v.add_argument("--level", choices=("fast", "full"), default="fast")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--samples", type=int, default=None,
                   help="Monte Carlo shots (default 20000 fast, 100000 full)")
    v.add_argument("--out", default="-")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except UndefinedContrastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
