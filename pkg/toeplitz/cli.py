"""
Command-Line Interface

Reproducible experiments over the toeplitz package. Every subcommand writes
CSV files (a version/config comment line, then a header) plus the resolved
configuration as config.json into its output directory.

Exit codes: 0 on success, 2 on configuration or argument errors (nothing is
written), 1 on numerical failures.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from loguru import logger

from config import settings
from toeplitz import __version__
from toeplitz.capacitance import (
    CapacitanceSource, load, regularize, skin_report, toeplitz_distance, toeplitz_distance_series,
)
from toeplitz.defects import DEFECT, decay_profile, defect_eigenpairs
from toeplitz.eigenmodes import (
    band_structure_sweep, bulk_eigenvector, cbs_complex_map, cbs_decay_prediction,
    fit_decay_rate, truncation_decay_rates,
)
from toeplitz.exceptions import ConfigError, DomainError, ToeplitzError
from toeplitz.grid import Window, resolve_threads
from toeplitz.matrices import DefectSpec, assemble, fit_decay_rates
from toeplitz.pseudospectra import pseudo_pair, pseudospectrum_grid
from toeplitz.spectra import (
    admissible_quasiperiodicities, hermitian_spectrum_interval, schmidt_spitzer_set, winding_grid,
)
from toeplitz.symbol import ALGEBRAIC, DecayLaw, LaurentSymbol, parse_law, symbol_from_json, synthesize
from toeplitz.utils import setup_logging, write_csv, write_json

DEFAULTS = {
    "band-structure": {"lambda_min": -3.0, "lambda_max": 3.0, "steps": 600, "resolution": 128},
    "spectra": {"window": "-3,3,-3,3", "resolution": 64},
    "limit-set": {"window": "-3,3,-3,3", "resolution": 256},
    "eigvec": {"lambda": "0", "N": 200, "envelope": 12},
    "pseudospectrum": {"n": 40, "window": "-3,3,-3,3", "resolution": 64},
    "pseudo-pair": {"p": 2.0, "q": None, "c_plus": 1.0, "c_minus": 0.5, "a0": 0.0,
                    "N": "20,40,80,160", "norm": "one"},
    "defect": {"n": 101, "site": None},
    "skin": {"source": "synth", "gamma": 1.0, "p": 1.4, "n": settings.DEFAULT_OUTER_SIZE, "c0": 1.0,
             "bandwidths": "8,20", "n_block": settings.DEFAULT_BLOCK_SIZE,
             "edge": 0.0, "noise": 0.0, "scan": 200},
    "ingest": {"n_block": settings.DEFAULT_BLOCK_SIZE},
}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so run() can map the exit code."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _add_symbol_source(parser):
    group = parser.add_argument_group("symbol source")
    group.add_argument("--law", help="Decay law, e.g. algebraic:p=1.8,c_minus=0.5")
    group.add_argument("--m", type=int, help="Bandwidth used with --law")
    group.add_argument("--coeffs", help="Inline coefficients 'k:a_k,...', e.g. --coeffs=-1:2,1:0.5")
    group.add_argument("--symbol", help="Symbol JSON file or inline JSON object")


def _add_window(parser):
    parser.add_argument("--window", help="re_min,re_max,im_min,im_max, e.g. --window=-3,3,-2,2")
    parser.add_argument("--resolution", type=int, help="Grid points per axis")


def build_parser():
    parser = _Parser(prog="toeplitz-spectra", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"toeplitz-spectra {__version__}")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="Logging level")
    parser.add_argument("--log-file", action="store_true", help="Also log to a rotating file in LOG_DIR")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with parameters; flags override it")
        p.add_argument("--out", help="Output directory")
        p.add_argument("--seed", type=int, help="Random seed")
        p.add_argument("--threads", type=int, help="Worker cap (overrides TOEPLITZ_SPECTRA_THREADS)")
        return p

    p = command("band-structure", "Real-lambda band structure and complex beta map")
    _add_symbol_source(p)
    p.add_argument("--lambda-min", type=float)
    p.add_argument("--lambda-max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--window", help="Complex window for the beta heatmap")
    p.add_argument("--resolution", type=int)

    p = command("spectra", "Winding classification on a grid")
    _add_symbol_source(p)
    _add_window(p)
    p.add_argument("--quasiperiodicities", help="alpha_min,alpha_max,beta_min,beta_max for Hermitian symbols")

    p = command("limit-set", "Limiting set of finite truncations")
    _add_symbol_source(p)
    _add_window(p)

    p = command("eigvec", "Bulk eigenvector and decay rates")
    _add_symbol_source(p)
    p.add_argument("--lambda", help="Spectral parameter, e.g. 0.5 or 1+0.2j")
    p.add_argument("--N", type=int, help="Vector length")
    p.add_argument("--truncation", type=int, help="Also compare with eigenvectors of T_n")
    p.add_argument("--envelope", type=int)

    p = command("pseudospectrum", "Smallest singular value heatmap")
    _add_symbol_source(p)
    p.add_argument("--matrix", help="Dense matrix file (CSV or JSON) instead of a symbol")
    p.add_argument("--n", type=int, help="Truncation size for symbol sources")
    _add_window(p)

    p = command("pseudo-pair", "Pseudo-eigenvectors of dense algebraic Toeplitz matrices")
    p.add_argument("--law")
    for name in ("p", "q", "c-plus", "c-minus", "a0"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--N", help="Comma-separated sizes")
    p.add_argument("--lambda", help="Explicit lambda (default: scan)")
    p.add_argument("--norm", choices=("one", "two"))

    p = command("defect", "Green's mode and decay envelopes at a defect")
    _add_symbol_source(p)
    p.add_argument("--matrix", help="Dense matrix file, regularised to Toeplitz form")
    p.add_argument("--n", type=int, help="Matrix size for symbol and law sources")
    p.add_argument("--band", type=int, help="Bandwidth for roots and the Demko rate")
    p.add_argument("--site", type=int, help="1-based defect site (default: middle)")
    p.add_argument("--lambda", help="Evaluate the Green's mode at this lambda")
    p.add_argument("--eta", type=float, help="Defect strength; lambda is the detached eigenvalue")
    p.add_argument("--alpha", type=float, help="Jaffard exponent (default min(p, q) of the law)")

    p = command("skin", "End-to-end skin-effect pipeline")
    p.add_argument("--source", help="'synth' or file:PATH")
    p.add_argument("--gamma", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--c0", type=float)
    p.add_argument("--bandwidths", help="Comma-separated bandwidths")
    p.add_argument("--defect", help="site=K,eta=X")
    p.add_argument("--n-block", type=int)
    p.add_argument("--edge", type=float)
    p.add_argument("--noise", type=float)
    p.add_argument("--scan", type=int)
    p.add_argument("--sizes", help="Comma-separated outer sizes M for the Toeplitz distance series (synth only)")

    p = command("ingest", "Load a dense matrix, regularise it and fit decay rates")
    p.add_argument("--matrix", help="Matrix file (CSV or JSON)")
    p.add_argument("--n-block", type=int)
    return parser


def resolve_config(args):
    """Defaults, then the --config file, then explicit flags."""
    config = dict(DEFAULTS.get(args.command, {}))
    if args.config:
        try:
            with open(args.config) as f:
                loaded = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read config {args.config}: {e}")
        if not isinstance(loaded, dict):
            raise ConfigError("Config file must hold a JSON object")
        config.update(loaded)
    skip = {"command", "config", "log_level", "log_file"}
    config.update({k: v for k, v in vars(args).items() if v is not None and k not in skip})
    config.setdefault("out", str(Path("out") / args.command))
    config.setdefault("seed", 0)
    config["command"] = args.command
    config["version"] = __version__
    return config


def _require(config, key):
    if config.get(key) is None:
        raise ConfigError(f"Missing required parameter --{key.replace('_', '-')}")
    return config[key]


def _complex(text):
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"Not a complex number: {text!r}")


def _int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"Expected comma-separated integers, got {text!r}")


def _window(config):
    try:
        return Window.parse(_require(config, "window"))
    except DomainError as e:
        raise ConfigError(str(e))


def symbol_from_config(config):
    """Symbol from --symbol, --coeffs or --law with --m."""
    try:
        if config.get("symbol"):
            text = str(config["symbol"])
            payload = json.loads(text) if text.lstrip().startswith("{") else json.loads(Path(text).read_text())
            return symbol_from_json(payload)
        if config.get("coeffs"):
            pairs = (item.split(":") for item in str(config["coeffs"]).split(",") if item.strip())
            return LaurentSymbol.from_coeffs({int(k): float(v) for k, v in pairs})
        if config.get("law"):
            return synthesize(parse_law(config["law"]), int(_require(config, "m")))
    except (OSError, ValueError) as e:
        raise ConfigError(f"Invalid symbol source: {e}")
    except DomainError as e:
        raise ConfigError(str(e))
    raise ConfigError("Provide a symbol with --law/--m, --coeffs or --symbol")


def law_from_config(config):
    if config.get("law"):
        return parse_law(config["law"])
    p = float(_require(config, "p"))
    q = float(config["q"]) if config.get("q") is not None else p
    try:
        return DecayLaw(p=p, q=q, c_plus=float(config.get("c_plus", 1.0)),
                        c_minus=float(config.get("c_minus", 1.0)), a0=float(config.get("a0", 0.0)))
    except DomainError as e:
        raise ConfigError(str(e))


def cmd_band_structure(config, out, threads):
    s = symbol_from_config(config)
    lambdas = np.linspace(float(config["lambda_min"]), float(config["lambda_max"]), int(config["steps"]))
    table = band_structure_sweep(s, lambdas, threads)
    header = (["lambda"] + [f"alpha_{i}" for i in range(1, 2 * s.m + 1)]
              + [f"beta_{i}" for i in range(1, 2 * s.m + 1)])
    files = [write_csv(out / "band_structure.csv", header, table, config)]
    if config.get("window"):
        cmap = cbs_complex_map(s, _window(config), int(config["resolution"]), threads)
        rows = ((x, y, cmap.betas[iy, ix]) for iy, y in enumerate(cmap.im) for ix, x in enumerate(cmap.re))
        files.append(write_csv(out / "cbs_map.csv", ["re", "im", "beta"], rows, config))
    return files


def cmd_spectra(config, out, threads):
    s = symbol_from_config(config)
    window = _window(config)
    resolution = int(config["resolution"])
    labels = winding_grid(s, window, resolution, resolution, threads)
    xs, ys = window.axes(resolution, resolution)
    rows = ((x, y, labels[iy][ix].winding, labels[iy][ix].kind)
            for iy, y in enumerate(ys) for ix, x in enumerate(xs))
    files = [write_csv(out / "spectra.csv", ["re", "im", "winding", "label"], rows, config)]
    if s.is_hermitian():
        r, R = hermitian_spectrum_interval(s)
        files.append(write_json(out / "hermitian_interval.json", {"r": r, "R": R}))
        if config.get("quasiperiodicities"):
            a0, a1, b0, b1 = Window.parse(config["quasiperiodicities"]).to_list()
            level = admissible_quasiperiodicities(s, (a0, a1), (b0, b1), resolution)
            rows = (tuple(seg.reshape(-1)) for seg in level.segments)
            files.append(write_csv(out / "quasiperiodicities.csv",
                                   ["alpha0", "beta0", "alpha1", "beta1"], rows, config))
    return files


def cmd_limit_set(config, out, threads):
    s = symbol_from_config(config)
    points = schmidt_spitzer_set(s, _window(config), int(config["resolution"]), threads=threads)
    return [write_csv(out / "limit_set.csv", ["re", "im"], ((z.real, z.imag) for z in points), config)]


def cmd_eigvec(config, out, threads):
    s = symbol_from_config(config)
    lam = _complex(config["lambda"])
    N = int(config["N"])
    mode = bulk_eigenvector(s, lam, N)
    rows = ((j, v.real, v.imag, abs(v)) for j, v in enumerate(mode.values))
    files = [write_csv(out / "eigvec.csv", ["j", "re", "im", "abs"], rows, config)]
    margin = 2 * s.m
    summary = {"lambda": lam, "beta_predicted": cbs_decay_prediction(s, lam), "roots_used": mode.roots_used}
    if N - 2 * margin >= 8:
        fit = fit_decay_rate(mode.values, (margin, N - margin), int(config["envelope"]))
        summary.update({"beta_fit": fit.beta, "r_squared": fit.r_squared})
    files.append(write_json(out / "eigvec.json", summary))
    if config.get("truncation"):
        modes = truncation_decay_rates(s, int(config["truncation"]), int(config["envelope"]))
        rows = ((m.eigenvalue.real, m.eigenvalue.imag, m.predicted_beta, m.fitted_beta,
                 m.r_squared, m.separation, m.period, int(m.resolved)) for m in modes)
        header = ["re", "im", "beta_predicted", "beta_fit", "r_squared", "separation", "period", "resolved"]
        files.append(write_csv(out / "truncation.csv", header, rows, config))
    return files


def cmd_pseudospectrum(config, out, threads):
    if config.get("matrix"):
        matrix = load(config["matrix"])
    else:
        matrix = assemble(symbol_from_config(config), int(config["n"]))
    grid = pseudospectrum_grid(matrix, _window(config), int(config["resolution"]), threads)
    rows = ((x, y, grid.values[iy, ix]) for iy, y in enumerate(grid.im) for ix, x in enumerate(grid.re))
    return [write_csv(out / "pseudospectrum.csv", ["re", "im", "sigma_min"], rows, config)]


def cmd_pseudo_pair(config, out, threads):
    law = law_from_config(config)
    lam = _complex(config["lambda"]).real if config.get("lambda") is not None else None
    files = []
    series = []
    for N in _int_list(config["N"]):
        pair = pseudo_pair(law, N, lam=lam, norm=config["norm"], threads=threads)
        series.append(pair.summary())
        rows = ((j, v.real, v.imag) for j, v in enumerate(pair.v_n))
        files.append(write_csv(out / f"pseudo_vector_N{N}.csv", ["j", "re", "im"], rows, config))
    files.append(write_json(out / "pseudo_pair.json", {"series": series}))
    return files


def _defect_source(config):
    """Matrix for the defect command and the Jaffard exponent its source implies."""
    n = int(config["n"])
    if config.get("matrix"):
        matrix = load(config["matrix"])
        T = regularize(matrix, min(n, matrix.n))
        fit = fit_decay_rates(T)
        return T, min(fit.p, fit.q)
    if config.get("law"):
        law = parse_law(config["law"])
        source = synthesize(law, int(config["m"])) if config.get("m") else law
        implied = min(law.p, law.q) if law.kind == ALGEBRAIC else None
        return assemble(source, n), implied
    return assemble(symbol_from_config(config), n), None


def cmd_defect(config, out, threads):
    T, implied_alpha = _defect_source(config)
    alpha = config.get("alpha") or implied_alpha
    if alpha is None:
        raise ConfigError("--alpha is required for symbol sources")
    site = int(config["site"]) if config.get("site") else (T.n + 1) // 2
    band = int(config["band"]) if config.get("band") else T.bandwidth()

    if config.get("lambda") is not None:
        lam = _complex(config["lambda"])
    elif config.get("eta") is not None:
        pairs = [p for p in defect_eigenpairs(T, DefectSpec(site, float(config["eta"]))) if p.label == DEFECT]
        if not pairs:
            raise ToeplitzError("No defect eigenvalue detached from the spectrum")
        lam = max(pairs, key=lambda p: abs(p.value)).value
    else:
        raise ConfigError("Provide --lambda or --eta")

    profile = decay_profile(T, lam, site, float(alpha), band)
    rows = ((j + 1, profile.mode[j], profile.cbs_bound[j], profile.demko_bound[j], profile.jaffard_bound[j])
            for j in range(T.n))
    header = ["index", "abs_u", "cbs_bound", "demko_bound", "jaffard_bound"]
    summary = dict(profile.summary(), **{"lambda": lam, "band": band})
    return [write_csv(out / "defect.csv", header, rows, config), write_json(out / "defect.json", summary)]


def _skin_inputs(config):
    text = str(config["source"])
    try:
        if text.startswith("file:"):
            source = CapacitanceSource(origin="file", path=text[len("file:"):])
        elif text == "synth":
            source = CapacitanceSource(gamma=float(config["gamma"]), p_syn=float(config["p"]),
                                       n=int(config["n"]), c0=float(config["c0"]), edge=float(config["edge"]),
                                       noise=float(config["noise"]), seed=int(config["seed"]))
        else:
            raise ConfigError(f"--source must be 'synth' or file:PATH, got {text!r}")
        defect = DefectSpec.parse(config["defect"]) if config.get("defect") else None
    except DomainError as e:
        raise ConfigError(str(e))
    return source, defect


def cmd_skin(config, out, threads):
    source, defect = _skin_inputs(config)
    series = None
    if config.get("sizes"):
        try:
            series = toeplitz_distance_series(source, _int_list(config["sizes"]), int(config["n_block"]), threads)
        except DomainError as e:
            raise ConfigError(str(e))
    report = skin_report(source, _int_list(config["bandwidths"]), defect, int(config["n_block"]),
                         int(config["scan"]), threads)

    files = [write_json(out / "report.json", report.summary())]
    if series is not None:
        files.append(write_csv(out / "toeplitz_distance.csv", ["M", "distance"],
                               zip(series.sizes, series.distances), config))
    for b in report.bandwidths:
        m = b.bandwidth
        header = (["lambda"] + [f"alpha_{i}" for i in range(1, 2 * m + 1)]
                  + [f"beta_{i}" for i in range(1, 2 * m + 1)])
        files.append(write_csv(out / f"band_structure_b{m}.csv", header, b.sweep, config))
        rows = ((lam, ind, w if w is not None else "") for lam, ind, w in zip(b.lambdas, b.indicator, b.windings))
        files.append(write_csv(out / f"limit_scan_b{m}.csv", ["lambda", "indicator", "winding"], rows, config))
        rows = ((ev.real, ev.imag, beta, om.real, om.imag)
                for ev, beta, om in zip(b.eigenvalues, b.eigen_betas, b.frequencies))
        files.append(write_csv(out / f"eigen_betas_b{m}.csv", ["re", "im", "beta", "omega_re", "omega_im"],
                               rows, config))
        if b.profile is not None:
            p = b.profile
            rows = ((j + 1, p.mode[j], p.cbs_bound[j], p.demko_bound[j], p.jaffard_bound[j])
                    for j in range(len(p.mode)))
            files.append(write_csv(out / f"profile_b{m}.csv",
                                   ["index", "abs_u", "cbs_bound", "demko_bound", "jaffard_bound"], rows, config))
    return files


def cmd_ingest(config, out, threads):
    matrix = load(_require(config, "matrix"))
    n_block = int(config["n_block"])
    if not 1 <= n_block <= matrix.n:
        raise ConfigError(f"--n-block must lie in [1, {matrix.n}] for this matrix, got {n_block}")
    T = regularize(matrix, n_block)
    fit = fit_decay_rates(T)
    summary = {
        "n": matrix.n, "n_block": n_block, "toeplitz_distance": toeplitz_distance(matrix, n_block),
        "p": fit.p, "q": fit.q, "c_plus": fit.c_plus, "c_minus": fit.c_minus,
        "r_squared": list(fit.r_squared), "provenance": list(T.provenance),
    }
    return [write_json(out / "toeplitz.json", T.to_json()), write_json(out / "fit.json", summary)]


HANDLERS = {
    "band-structure": cmd_band_structure,
    "spectra": cmd_spectra,
    "limit-set": cmd_limit_set,
    "eigvec": cmd_eigvec,
    "pseudospectrum": cmd_pseudospectrum,
    "pseudo-pair": cmd_pseudo_pair,
    "defect": cmd_defect,
    "skin": cmd_skin,
    "ingest": cmd_ingest,
}


def run(argv=None):
    """
    Run one subcommand.

    Args:
        argv (list[str], optional): Arguments without the program name

    Returns:
        int: Exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as e:
        logger.error(str(e))
        return 2
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)
    if not args.command:
        parser.print_help(sys.stderr)
        return 2

    setup_logging(settings.LOG_DIR, args.log_level, to_file=args.log_file)
    try:
        config = resolve_config(args)
        threads = resolve_threads(config.get("threads"))
        out = Path(config["out"])
        files = HANDLERS[args.command](config, out, threads)
        files.append(write_json(out / "config.json", config))
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return 2
    except (ToeplitzError, np.linalg.LinAlgError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1
    logger.info(f"{args.command} wrote {len(files)} files to {out}")
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
