"""Batch experiment runner: ``python -m wignerlab <subcommand> [options]``.

Every run writes a JSON manifest before work starts and finalizes it
afterwards.  CSV outputs carry ``#``-prefixed metadata including the
configuration hash.  Exit codes: 0 success, 1 invalid input or failed
validation, 2 numerical failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import ast
import configparser
import csv
import hashlib
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NumericalError

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 64

SECTIONS = {
    "ensemble": ("N", "law", "convention", "samples", "g", "rate", "power"),
    "flow": ("t", "t_min", "t_max", "points", "order", "modes", "K"),
    "statistics": ("u", "s", "delta", "bins", "tau_max", "eta", "tol", "poisson"),
    "kernel": ("lam", "tau_sweep"),
    "fredholm": ("alpha_max", "step"),
    "compare": ("table", "reference", "column", "tolerance"),
    "run": ("seed", "workers", "out"),
}


# --------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    kind: str
    params: dict = field(default_factory=dict)

    def section_of(self, key):
        for sec, keys in SECTIONS.items():
            if key in keys:
                return sec
        return "extra"

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp["experiment"] = {"kind": self.kind}
        for key in sorted(self.params):
            sec = self.section_of(key)
            if sec not in cp:
                cp[sec] = {}
            cp[sec][key] = repr(self.params[key])
        lines = []
        for sec in cp.sections():
            lines.append(f"[{sec}]")
            lines += [f"{k} = {v}" for k, v in cp[sec].items()]
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp.read_string(text)
        kind = cp.get("experiment", "kind", fallback=None)
        params = {}
        for sec in cp.sections():
            if sec == "experiment":
                continue
            for k, v in cp[sec].items():
                try:
                    params[k] = ast.literal_eval(v)
                except (ValueError, SyntaxError):
                    params[k] = v
        return cls(kind, params)

    def hash(self) -> str:
        # execution settings do not change results
        params = {k: v for k, v in self.params.items() if k not in ("workers", "out")}
        blob = json.dumps({"kind": self.kind, "params": params}, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    config_hash: str
    version: str
    kind: str
    seeds: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    wall_time: float | None = None
    status: str = "running"

    def write(self, path):
        Path(path).write_text(json.dumps(self.__dict__, indent=2, default=str) + "\n")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", help="INI file; command-line flags take precedence")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="wignerlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="kind", required=True, parser_class=_Parser)

    def law_args(p):
        p.add_argument("--law", help="gaussian, quartic, bump or two_sided_exponential")
        p.add_argument("--g", type=float)
        p.add_argument("--rate", type=float)
        p.add_argument("--power", type=int)

    p = sub.add_parser("validate-law")
    law_args(p)
    _common(p)

    for name in ("sample-spectrum", "sc-check", "gaps", "paircorr"):
        p = sub.add_parser(name)
        p.add_argument("--N", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--convention", choices=["support1", "support2"])
        law_args(p)
        _common(p)
        if name == "sc-check":
            p.add_argument("--eta", type=float)
            p.add_argument("--tol", type=float)
        if name == "gaps":
            p.add_argument("--u", type=float)
            p.add_argument("--s", type=str, help="comma-separated gap lengths")
            p.add_argument("--delta", type=float)
        if name == "paircorr":
            p.add_argument("--u", type=float)
            p.add_argument("--tau-max", dest="tau_max", type=float)
            p.add_argument("--bins", type=int)
            p.add_argument("--poisson", action="store_const", const=True)

    for name in ("flow", "reverse"):
        p = sub.add_parser(name)
        p.add_argument("--modes", help="k:c pairs, e.g. 2:0.2,4:0.05")
        p.add_argument("--K", type=int)
        if name == "flow":
            p.add_argument("--t", type=float)
        else:
            p.add_argument("--order", type=int)
            p.add_argument("--t-min", dest="t_min", type=float)
            p.add_argument("--t-max", dest="t_max", type=float)
            p.add_argument("--points", type=int)
        _common(p)

    p = sub.add_parser("kernel")
    p.add_argument("--N", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--u", type=float)
    p.add_argument("--tau-sweep", dest="tau_sweep", help="start:stop:step")
    _common(p)

    p = sub.add_parser("fredholm")
    p.add_argument("--alpha-max", dest="alpha_max", type=float)
    p.add_argument("--step", type=float)
    _common(p)

    p = sub.add_parser("compare")
    p.add_argument("--table")
    p.add_argument("--reference")
    p.add_argument("--column")
    p.add_argument("--tolerance", type=float)
    _common(p)
    return ap


DEFAULTS = {
    "seed": 0, "workers": 1, "out": ".",
    "N": 400, "samples": 10, "convention": "support2", "law": "gaussian",
    "eta": 0.05, "tol": 0.05, "u": 0.0, "s": "0.5,1,2", "delta": 0.8,
    "tau_max": 3.0, "bins": 12, "poisson": False,
    "modes": "2:0.2,4:0.05", "K": 32, "t": 0.1, "order": 3, "t_min": 1e-3, "t_max": 1e-1,
    "points": 25, "lam": 0.5, "tau_sweep": "0.25:3:0.25", "alpha_max": 4.0, "step": 0.05,
    "column": None, "tolerance": 0.05,
}


def resolve_config(args) -> ExperimentConfig:
    params = {}
    if args.config:
        cfg = ExperimentConfig.from_ini(Path(args.config).read_text())
        if cfg.kind not in (None, args.kind):
            raise ValueError(f"config file is for {cfg.kind!r}, not {args.kind!r}")
        params.update(cfg.params)
    for k, v in vars(args).items():
        if k in ("kind", "config") or v is None:
            continue
        params[k] = v
    for k, v in DEFAULTS.items():
        if k in vars(args) or k in ("seed", "workers", "out"):
            params.setdefault(k, v)
    return ExperimentConfig(args.kind, params)


# --------------------------------------------------------------------------
# helpers


def _law_config(p):
    cfg = {"potential": p.get("law", "gaussian")}
    for k in ("g", "rate", "power"):
        if p.get(k) is not None:
            cfg[k] = p[k]
    return cfg


def _law(p):
    from .ensemble import law_from_config

    return law_from_config(_law_config(p))


def _spectrum_task(job):
    from .ensemble import law_from_config, sample_from_law
    from .spectra import hermitian_eigenvalues

    N, law_cfg, convention, seed = job
    law = law_from_config(law_cfg)
    return hermitian_eigenvalues(sample_from_law(N, law, convention, seed))


def _spectra(p, manifest):
    from .rng import derive_seed

    law_cfg = _law_config(p)
    seeds = [derive_seed(p["seed"], i) for i in range(p["samples"])]
    manifest.seeds = seeds
    jobs = [(p["N"], law_cfg, p["convention"], s) for s in seeds]
    if p["workers"] > 1:
        with ProcessPoolExecutor(p["workers"]) as ex:
            return list(ex.map(_spectrum_task, jobs))  # index order
    return [_spectrum_task(j) for j in jobs]


def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _sweep(text):
    a, b, h = (float(v) for v in str(text).split(":"))
    n = int(math.floor((b - a) / h + 1e-9)) + 1
    return [a + i * h for i in range(n)]


def _modes(text):
    from .ou_flow import HermiteDensity

    modes = {0: 1.0}
    for pair in str(text).split(","):
        if pair.strip():
            k, c = pair.split(":")
            modes[int(k)] = float(c)
    return modes, HermiteDensity


def write_csv(path, header, rows, meta):
    with open(path, "w", newline="") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}={v}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def read_table(path):
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def compare(table: np.ndarray, reference: np.ndarray, tolerance: float) -> dict:
    """Row-wise comparison of ``(x, value)`` tables on identical abscissae."""
    table = np.asarray(table, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if table.shape != reference.shape or not np.allclose(table[:, 0], reference[:, 0], rtol=0, atol=1e-12):
        raise ValueError("tables do not share the same abscissae")
    dev = np.abs(table[:, 1] - reference[:, 1])
    sup = float(dev.max()) if dev.size else 0.0
    return {"sup_deviation": sup, "deviations": dev.tolist(), "tolerance": tolerance,
            "pass": bool(sup <= tolerance)}


# --------------------------------------------------------------------------
# subcommands


def _validate_law(p, out, meta, manifest):
    from .ensemble import validate_law

    rep = validate_law(_law(p))
    path = out / "validate_law.json"
    body = {k: v for k, v in rep.__dict__.items()}
    body["passed"] = rep.passed
    path.write_text(json.dumps({"meta": meta, "report": body}, indent=2, default=str) + "\n")
    manifest.outputs.append(str(path))
    return EXIT_OK if rep.passed else EXIT_INPUT


def _sample_spectrum(p, out, meta, manifest):
    from .spectra import write_spectrum_csv

    for i, smp in enumerate(_spectra(p, manifest)):
        path = out / f"spectrum_{i:04d}.csv"
        write_spectrum_csv(path, smp, meta)
        manifest.outputs.append(str(path))
    return EXIT_OK


def _sc_check(p, out, meta, manifest):
    from .statistics import empirical_cdf_distance, in_good_set, ref_for

    samples = _spectra(p, manifest)
    rows = []
    for i, smp in enumerate(samples):
        rep = in_good_set(smp, p["eta"], p["tol"])
        rows.append((i, manifest.seeds[i], rep.worst_deviation, int(rep.passed)))
    sup = empirical_cdf_distance(samples, ref_for(samples[0]))
    meta = dict(meta, cdf_sup_distance=repr(sup))
    path = out / "sc_check.csv"
    write_csv(path, ["index", "seed", "worst_deviation", "good"], rows, meta)
    manifest.outputs.append(str(path))
    return EXIT_OK


def _gaps(p, out, meta, manifest):
    from .fredholm import gap_integral
    from .statistics import gap_statistic, merge_gap_estimates

    samples = _spectra(p, manifest)
    rows = []
    for s in _floats(p["s"]):
        est = merge_gap_estimates(gap_statistic(x, p["u"], s, p["delta"]) for x in samples)
        rows.append((s, est.value, est.stderr, gap_integral(s)))
    path = out / "gaps.csv"
    write_csv(path, ["s", "lambda_mean", "stderr", "reference"], rows, meta)
    manifest.outputs.append(str(path))
    return EXIT_OK


def _paircorr(p, out, meta, manifest):
    from .fredholm import sine_kernel
    from .rng import derive_seed
    from .statistics import SemicircleRef, pair_correlation_estimate, poisson_sample

    if p.get("poisson"):
        ref = SemicircleRef(p["convention"])
        seeds = [derive_seed(p["seed"], i) for i in range(p["samples"])]
        manifest.seeds = seeds
        samples = [poisson_sample(p["N"], ref, s) for s in seeds]
        est = pair_correlation_estimate(samples, p["u"], p["tau_max"], p["bins"], ref=ref,
                                        N=p["N"])
    else:
        est = pair_correlation_estimate(_spectra(p, manifest), p["u"], p["tau_max"], p["bins"])
    if est.empty:
        raise NumericalError("no pairs fell inside the window")
    rows = []
    for lo, hi, d, e in zip(est.edges[:-1], est.edges[1:], est.density, est.stderr):
        x = np.linspace(lo, hi, 201)
        rows.append((0.5 * (lo + hi), d, e, float(np.mean(1 - sine_kernel(x) ** 2))))
    path = out / "paircorr.csv"
    write_csv(path, ["tau", "estimate", "stderr", "reference"], rows, meta)
    manifest.outputs.append(str(path))
    return EXIT_OK


def _flow(p, out, meta, manifest):
    from .ou_flow import semigroup

    modes, HD = _modes(p["modes"])
    d = semigroup(HD.from_modes(modes, p["K"]), p["t"])
    path = out / "flow.csv"
    write_csv(path, ["k", "coefficient"], [(k, float(c)) for k, c in enumerate(d.coeffs)], meta)
    manifest.outputs.append(str(path))
    return EXIT_OK


def _reverse(p, out, meta, manifest):
    from .ou_flow import reversal_error_chi2

    modes, HD = _modes(p["modes"])
    d = HD.from_modes(modes, p["K"])
    ts = np.geomspace(p["t_min"], p["t_max"], p["points"])
    errs = [reversal_error_chi2(d, float(t), p["order"]) for t in ts]
    slope = float(np.polyfit(np.log(ts), np.log(errs), 1)[0])
    path = out / "reverse.csv"
    write_csv(path, ["t", "chi2"], list(zip(ts, errs)), dict(meta, slope=repr(slope)))
    manifest.outputs.append(str(path))
    return EXIT_OK


def _kernel(p, out, meta, manifest):
    from .bh_kernel import kernel_sweep, quantile_config, write_sweep_csv

    cfg = quantile_config(p["N"], p["lam"], p["u"])
    rows = kernel_sweep(cfg, _sweep(p["tau_sweep"]))
    path = out / "kernel.csv"
    write_sweep_csv(path, rows, dict(meta, t=repr(cfg.t)))
    manifest.outputs.append(str(path))
    return EXIT_OK


def _fredholm(p, out, meta, manifest):
    from .fredholm import fredholm_table, write_table_csv

    path = out / "fredholm.csv"
    write_table_csv(path, fredholm_table(p["alpha_max"], p["step"]), meta)
    manifest.outputs.append(str(path))
    return EXIT_OK


def _compare(p, out, meta, manifest):
    if not p.get("table") or not p.get("reference"):
        raise ValueError("compare needs --table and --reference")
    h1, t1 = read_table(p["table"])
    h2, t2 = read_table(p["reference"])
    col = p.get("column")
    i1 = h1.index(col) if col in h1 else 1
    i2 = h2.index(col) if col in h2 else 1
    rep = compare(t1[:, [0, i1]], t2[:, [0, i2]], p["tolerance"])
    path = out / "compare.json"
    path.write_text(json.dumps(dict(rep, meta=meta), indent=2) + "\n")
    manifest.outputs.append(str(path))
    return EXIT_OK if rep["pass"] else EXIT_INPUT


COMMANDS = {
    "validate-law": _validate_law, "sample-spectrum": _sample_spectrum, "sc-check": _sc_check,
    "flow": _flow, "reverse": _reverse, "kernel": _kernel, "fredholm": _fredholm,
    "gaps": _gaps, "paircorr": _paircorr, "compare": _compare,
}


def run(config: ExperimentConfig) -> int:
    if config.kind not in COMMANDS:
        print(f"unknown subcommand {config.kind!r}", file=sys.stderr)
        return EXIT_USAGE
    p = dict(config.params)
    out = Path(p.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    h = config.hash()
    manifest = RunManifest(h, __version__, config.kind)
    mpath = out / f"manifest_{config.kind}.json"
    manifest.write(mpath)
    (out / f"config_{config.kind}.ini").write_text(config.to_ini())
    meta = {"kind": config.kind, "config_hash": h, "version": __version__}
    start = time.perf_counter()
    try:
        code = COMMANDS[config.kind](p, out, meta, manifest)
        manifest.status = "ok" if code == EXIT_OK else "failed"
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        manifest.status, code = "numerical-error", EXIT_NUMERIC
    except (ValueError, KeyError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        manifest.status, code = "input-error", EXIT_INPUT
    manifest.wall_time = time.perf_counter() - start
    manifest.write(mpath)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
    except (ValueError, OSError, configparser.Error) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
