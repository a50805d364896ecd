"""Command-line interface.

Subcommands:

* ``denoise`` / ``deblur``: MAP, approximate mean-field, or gradient-descent
  restoration of a PNG/PGM/PPM image (deblur under a Gaussian kernel).
* ``sample``: Gibbs chain for the posterior mean image and mean edge map.
* ``synth``: write the built-in synthetic test image.

Options may come from the command line, from a ``key = value`` config file
(``--config``), or from a named preset (``--preset``); explicit flags beat
the config file, which beats the preset.  Exit codes: 0 success, 1 usage
error, 2 runtime/solver failure.
"""

import argparse
import sys

from .experiments import PRESETS, add_noise, export_edge_map, make_test_image, psnr
from .image_io import load_image, save_image
from .operators import ConvolutionOperator, IdentityOperator, gaussian_kernel
from .priors import (
    CapabilityError,
    ExponentialDiffusivityPrior,
    GammaPrior,
    TwoPointPrior,
)
from .restore import RestoreConfig, restore
from .sampler import SamplerConfig, run_chain


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


_METHOD_MAP = {"em": "em", "meanfield": "mean_field_approx", "gd": "gradient_descent"}

# key -> (type, default); config-file keys are spelled exactly like the flags
_OPTIONS = {
    "method": (str, "em"),
    "prior": (str, "gamma"),
    "lambda": (float, 1000.0),
    "C": (float, None),
    "mu": (float, 0.0),
    "sigma": (float, 0.1),
    "iters": (int, 100),
    "burn-in": (int, None),
    "seed": (int, 0),
    "tol": (float, 1e-4),
    "add-noise": (float, None),
    "blur-radius": (int, 1),
    "blur-sigma": (float, 1.0),
    "input": (str, None),
    "output": (str, None),
    "edges": (str, None),
    "metrics": (str, None),
    "reference": (str, None),
    "size": (int, 64),
    "channels": (int, 1),
}


def _add_common_options(p):
    p.add_argument("--input", help="input image (PNG, PGM or PPM)")
    p.add_argument("--output", help="restored image path")
    p.add_argument("--edges", help="write the edge map here (plus <path>.txt sidecar)")
    p.add_argument("--method", choices=sorted(_METHOD_MAP), help="restoration method")
    p.add_argument("--prior", choices=["gamma", "two-point", "exp"], help="gradient prior")
    p.add_argument("--lambda", dest="lam", type=float, help="prior rate parameter")
    p.add_argument("--C", dest="C", type=float, help="gamma prior smoothing weight")
    p.add_argument("--mu", type=float, help="two-point prior edge threshold")
    p.add_argument("--sigma", type=float, help="noise standard deviation")
    p.add_argument("--iters", type=int, help="outer/sampling iterations")
    p.add_argument("--burn-in", dest="burn_in", type=int, help="discarded sampler iterations")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--tol", type=float, help="relative-change stopping tolerance")
    p.add_argument("--preset", choices=sorted(PRESETS), help="named experiment preset")
    p.add_argument("--add-noise", dest="add_noise", type=float, metavar="SIGMA",
                   help="add seeded Gaussian noise to the input first")
    p.add_argument("--metrics", help="write PSNR (with --reference) and objective trace here")
    p.add_argument("--reference", help="clean reference image for PSNR")
    p.add_argument("--config", help="key = value file with the same option names")


def build_parser():
    parser = _Parser(prog="gsmrestore", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in [
        ("denoise", "restore from additive Gaussian noise"),
        ("deblur", "restore from Gaussian blur plus noise"),
        ("sample", "Gibbs-sample the posterior; outputs the mean image"),
    ]:
        p = sub.add_parser(name, help=desc)
        _add_common_options(p)
        if name == "deblur":
            p.add_argument("--blur-radius", dest="blur_radius", type=int,
                           help="Gaussian kernel radius (kernel is 2r+1 square)")
            p.add_argument("--blur-sigma", dest="blur_sigma", type=float,
                           help="Gaussian kernel width")
    p = sub.add_parser("synth", help="write the built-in synthetic test image")
    p.add_argument("--size", type=int, help="image side length")
    p.add_argument("--channels", type=int, choices=[1, 3], help="number of channels")
    p.add_argument("--output", required=True, help="where to write the image")
    p.add_argument("--add-noise", dest="add_noise", type=float, metavar="SIGMA",
                   help="add seeded Gaussian noise before writing")
    p.add_argument("--seed", type=int, help="noise seed")
    p.add_argument("--config", help="key = value file with the same option names")
    return parser


def read_config_file(path):
    values = {}
    try:
        with open(path) as f:
            lines = f.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}")
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "preset":
            values[key] = value
            continue
        if key not in _OPTIONS:
            raise UsageError(f"{path}:{lineno}: unknown option {key!r}")
        caster = _OPTIONS[key][0]
        try:
            values[key] = caster(value)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}")
    return values


_PRESET_KEYS = {
    "method": "method",
    "prior": "prior",
    "lambda": "lam",
    "C": "C",
    "mu": "mu",
    "sigma": "sigma",
    "iters": "iters",
    "burn-in": "burn_in",
    "tol": "tol",
    "blur-radius": "blur_radius",
    "blur-sigma": "blur_sigma",
}

_ARG_DESTS = {
    "lambda": "lam",
    "burn-in": "burn_in",
    "add-noise": "add_noise",
    "blur-radius": "blur_radius",
    "blur-sigma": "blur_sigma",
}


def resolve_options(args, config_values):
    """Merge flags over config file over preset over defaults."""
    preset_name = getattr(args, "preset", None)
    if preset_name is None:
        preset_name = config_values.get("preset")
    preset = None
    if preset_name is not None:
        if preset_name not in PRESETS:
            raise UsageError(f"unknown preset {preset_name!r}")
        preset = PRESETS[preset_name]
    resolved = {}
    for key, (_, default) in _OPTIONS.items():
        dest = _ARG_DESTS.get(key, key)
        value = getattr(args, dest, None)
        if value is None:
            value = config_values.get(key)
        if value is None and preset is not None and key in _PRESET_KEYS:
            value = getattr(preset, _PRESET_KEYS[key])
        if value is None:
            value = default
        resolved[key] = value
    return resolved


def build_prior(opts):
    name = opts["prior"]
    lam = opts["lambda"]
    if lam is not None and lam <= 0:
        raise UsageError("--lambda must be positive")
    if name == "gamma":
        C = opts["C"] if opts["C"] is not None else lam
        if C <= 0:
            raise UsageError("--C must be positive")
        return GammaPrior(lam=lam, C=C)
    if name == "two-point":
        return TwoPointPrior(lam=lam, mu=opts["mu"])
    if name == "exp":
        return ExponentialDiffusivityPrior()
    raise UsageError(f"unknown prior {name!r}")


def _write_metrics(path, psnr_value, trace):
    lines = []
    if psnr_value is not None:
        lines.append(repr(psnr_value))
    lines.extend(repr(v) for v in trace)
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def _load_input(opts):
    if opts["input"] is None:
        raise UsageError("--input is required")
    observed = load_image(opts["input"])
    if opts["add-noise"] is not None:
        if opts["add-noise"] < 0:
            raise UsageError("--add-noise must be >= 0")
        observed = add_noise(observed, opts["add-noise"], seed=opts["seed"])
    return observed


def _run_restore(opts, forward):
    if opts["sigma"] <= 0:
        raise UsageError("--sigma must be positive")
    if opts["iters"] < 1:
        raise UsageError("--iters must be >= 1")
    if opts["tol"] <= 0:
        raise UsageError("--tol must be positive")
    if opts["method"] not in _METHOD_MAP:
        raise UsageError(f"unknown method {opts['method']!r}")
    if opts["output"] is None:
        raise UsageError("--output is required")
    observed = _load_input(opts)
    prior = build_prior(opts)
    config = RestoreConfig(
        prior=prior,
        forward=forward,
        sigma=opts["sigma"],
        method=_METHOD_MAP[opts["method"]],
        max_outer_iters=opts["iters"],
        outer_tol=opts["tol"],
    )
    result = restore(config, observed)
    save_image(result.image, opts["output"])
    if opts["edges"] is not None:
        export_edge_map(result.diffusivity, opts["edges"])
    if opts["metrics"] is not None:
        value = None
        if opts["reference"] is not None:
            value = psnr(result.image, load_image(opts["reference"]))
        _write_metrics(opts["metrics"], value, result.objective_trace)
    return 0


def _run_sample(opts):
    if opts["sigma"] <= 0:
        raise UsageError("--sigma must be positive")
    if opts["iters"] < 1:
        raise UsageError("--iters must be >= 1")
    if opts["output"] is None:
        raise UsageError("--output is required")
    observed = _load_input(opts)
    prior = build_prior(opts)
    try:
        config = SamplerConfig(
            prior=prior,
            forward=IdentityOperator(),
            sigma=opts["sigma"],
            num_iterations=opts["iters"],
            burn_in=opts["burn-in"],
            seed=opts["seed"],
        )
    except (CapabilityError, ValueError) as exc:
        raise UsageError(str(exc))
    result = run_chain(config, observed)
    save_image(result.mean_image, opts["output"])
    if opts["edges"] is not None:
        export_edge_map(result.mean_latent / prior.lam, opts["edges"])
    if opts["metrics"] is not None:
        value = None
        if opts["reference"] is not None:
            value = psnr(result.mean_image, load_image(opts["reference"]))
        _write_metrics(opts["metrics"], value, [])
    return 0


def _run_synth(opts):
    if opts["size"] < 1:
        raise UsageError("--size must be >= 1")
    image = make_test_image(size=opts["size"], channels=opts["channels"])
    if opts["add-noise"] is not None:
        image = add_noise(image, opts["add-noise"], seed=opts["seed"])
    save_image(image, opts["output"])
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config_values = {}
        if getattr(args, "config", None):
            config_values = read_config_file(args.config)
        opts = resolve_options(args, config_values)
        if args.command == "synth":
            return _run_synth(opts)
        if args.command == "sample":
            return _run_sample(opts)
        if args.command == "deblur":
            if opts["blur-radius"] < 0 or opts["blur-sigma"] <= 0:
                raise UsageError("--blur-radius must be >= 0 and --blur-sigma > 0")
            kernel = gaussian_kernel(opts["blur-radius"], opts["blur-sigma"])
            return _run_restore(opts, ConvolutionOperator(kernel))
        return _run_restore(opts, IdentityOperator())
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - boundary of the CLI
        print(f"gsmrestore: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main(sys.argv[1:]))
