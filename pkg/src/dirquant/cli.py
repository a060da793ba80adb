"""Command-line front end: fit, contour, tube, ci, simulate, elicit.

Runs are driven by a flat key = value config file (grammar in the README);
a few common settings can be overridden by flags.  Exit codes: 0 success,
2 config error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace

import numpy as np

from . import constants, io, simlab
from .contours import tau_contour, tube_slice
from .errors import ConfigError, DataError, DirquantError, NumericalError
from .geometry import Dataset, Direction
from .inference import asymptotic_ci, naive_ci, posterior_mean, subgradient_diagnostics
from .priors import spherical_prior
from .samplers import KernelSpec, PriorSpec, default_bandwidth, gibbs_unconditional

__all__ = ["main", "run", "parse_config_file", "ingest_csv"]


# ---------------------------------------------------------------------------
# config handling


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; '#' comments; comma-separated lists."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


def parse_config_file(path: str) -> dict:
    try:
        with open(path) as handle:
            return parse_config_text(handle.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc


def _as_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _as_floats(value: str) -> list[float]:
    try:
        return [float(v) for v in _as_list(value)]
    except ValueError as exc:
        raise ConfigError(f"expected numeric list, got {value!r}") from exc


def _get(cfg: dict, key: str, default=None, required: bool = False) -> str:
    if key in cfg:
        return cfg[key]
    if required:
        raise ConfigError(f"missing required config key {key!r}")
    return default


# ---------------------------------------------------------------------------
# data ingestion


def ingest_csv(path: str, response_cols, covariate_cols=(), jitter: bool = False, seed: int = 0):
    """Read a CSV into a Dataset, dropping rows with missing values.

    With ``jitter`` a uniform(0, 1) perturbation is added to every response
    entry so discrete scores become continuous (ties broken almost surely).
    Returns (dataset, report) where report counts dropped rows.
    """
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty file") from None
            header = [h.strip() for h in header]
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != len(header):
                    raise DataError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
                rows.append((lineno, row))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    def _columns(names):
        idx = []
        for name in names:
            if name not in header:
                raise DataError(f"{path}: no column named {name!r} (have {header})")
            idx.append(header.index(name))
        return idx

    r_idx = _columns(response_cols)
    c_idx = _columns(covariate_cols)
    if len(r_idx) < 2:
        raise ConfigError("need at least 2 response columns")

    parsed, dropped = [], 0
    for lineno, row in rows:
        vals = []
        ok = True
        for j in r_idx + c_idx:
            cell = row[j].strip()
            if cell == "" or cell.lower() in ("na", "nan", "null"):
                ok = False
                break
            try:
                vals.append(float(cell))
            except ValueError:
                raise DataError(f"{path}: line {lineno}: non-numeric value {row[j]!r}") from None
        if ok:
            parsed.append(vals)
        else:
            dropped += 1
    if not parsed:
        raise DataError(f"{path}: no complete rows after dropping missing values")
    arr = np.array(parsed)
    y = arr[:, : len(r_idx)]
    x = arr[:, len(r_idx) :] if c_idx else None
    if jitter:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
        y = y + rng.uniform(size=y.shape)
    report = {"rows_in": len(rows), "rows_used": len(parsed), "rows_dropped": dropped}
    return Dataset(y=y, x=x), report


# ---------------------------------------------------------------------------
# commands


def _load_common(cfg: dict):
    path = _get(cfg, "input", required=True)
    responses = _as_list(_get(cfg, "response", required=True))
    covariates = _as_list(_get(cfg, "covariates", ""))
    jitter = _get(cfg, "jitter", "false").lower() in ("1", "true", "yes")
    seed = int(_get(cfg, "seed", "0"))
    data, report = ingest_csv(path, responses, covariates, jitter=jitter, seed=seed)
    return data, report, seed


def _prior_from_config(cfg: dict, d: int) -> PriorSpec:
    mean = _as_floats(_get(cfg, "prior_mean", ",".join(["0"] * d)))
    var = _as_floats(_get(cfg, "prior_variance", ",".join(["1000"] * d)))
    if len(mean) != d or len(var) != d:
        raise ConfigError(f"prior must have dimension {d}")
    return PriorSpec(mean=np.array(mean), covariance=np.diag(var))


def _sampler_settings(cfg: dict):
    draws = int(_get(cfg, "draws", str(constants.DEFAULT_N_DRAWS)))
    burn = int(_get(cfg, "burn_in", str(constants.DEFAULT_BURN_IN)))
    if draws <= burn:
        raise ConfigError("draws must exceed burn_in")
    return draws, burn


def _out_dir(cfg: dict, args) -> str:
    out = args.out or _get(cfg, "output_dir", "dirquant-out")
    os.makedirs(out, exist_ok=True)
    return out


def _cmd_fit(cfg: dict, args) -> int:
    data, report, seed = _load_common(cfg)
    u = np.array(_as_floats(_get(cfg, "direction", required=True)))
    u = u / np.linalg.norm(u)
    tau = float(_get(cfg, "tau", required=True))
    direction = Direction(u=u, tau=tau)
    draws, burn = _sampler_settings(cfg)
    prior = _prior_from_config(cfg, data.k + data.p)
    chain = gibbs_unconditional(data, direction, prior, n_draws=draws, burn_in=burn, seed=seed)
    out = _out_dir(cfg, args)
    prov = io.provenance_block(cfg, seed)
    io.write_chain(chain, os.path.join(out, "chain.csv"), os.path.join(out, "chain.json"),
                   extra_meta={"provenance": prov, "ingest": report})
    theta = posterior_mean(chain)
    summary = {
        "posterior_mean": {name: float(v) for name, v in zip(chain.names, chain.post_burn().mean(axis=0))},
        "acceptance_rate": chain.acceptance_rate,
        "subgradient": None,
        "ci": None,
        "provenance": prov,
        "ingest": report,
    }
    sg = subgradient_diagnostics(data, direction, theta)
    summary["subgradient"] = {"sg1": sg.sg1, "sg2": [float(v) for v in sg.sg2], "n": sg.n}
    if data.p == 0 and data.k == 2:
        ci = asymptotic_ci(chain, data, direction, level=float(_get(cfg, "level", "0.95")))
        summary["ci"] = {
            "names": list(ci.names),
            "lower": [float(v) for v in ci.lower],
            "upper": [float(v) for v in ci.upper],
            "std_error": [float(v) for v in ci.std_error],
            "level": ci.level,
        }
    io.write_json(os.path.join(out, "fit.json"), summary)
    print(f"fit: wrote chain.csv, chain.json, fit.json to {out}")
    return 0


def _cmd_contour(cfg: dict, args) -> int:
    data, report, seed = _load_common(cfg)
    taus = _as_floats(_get(cfg, "tau", required=True))
    n_dir = int(_get(cfg, "directions", str(constants.DEFAULT_N_DIRECTIONS)))
    estimator = _get(cfg, "estimator", "bayes-mean")
    draws, burn = _sampler_settings(cfg)
    out = _out_dir(cfg, args)
    prov = io.provenance_block(cfg, seed)
    for tau in taus:
        poly = tau_contour(
            data, tau, n_directions=n_dir, estimator=estimator,
            n_draws=draws, burn_in=burn, seed=seed,
            simultaneous=_get(cfg, "simultaneous", "false").lower() in ("1", "true", "yes"),
        )
        tag = f"{tau:g}".replace(".", "p")
        io.write_polygon(poly, os.path.join(out, f"contour_tau{tag}.csv"),
                         os.path.join(out, f"contour_tau{tag}.json"), provenance=prov)
    print(f"contour: wrote {len(taus)} polygon(s) to {out}")
    return 0


def _cmd_tube(cfg: dict, args) -> int:
    data, report, seed = _load_common(cfg)
    if data.p < 1:
        raise ConfigError("tube requires at least one covariate column")
    taus = _as_floats(_get(cfg, "tau", required=True))
    x0s = _as_floats(_get(cfg, "x0", required=True))
    n_dir = int(_get(cfg, "directions", str(constants.DEFAULT_N_DIRECTIONS)))
    draws, burn = _sampler_settings(cfg)
    kind = _get(cfg, "design", "local-constant")
    h = _get(cfg, "bandwidth", None)
    kernel = KernelSpec(bandwidth=float(h) if h else default_bandwidth(data.x))
    out = _out_dir(cfg, args)
    prov = io.provenance_block(cfg, seed)
    for tau in taus:
        for x0 in x0s:
            poly = tube_slice(data, tau, x0, kernel, design_kind=kind,
                              n_directions=n_dir, n_draws=draws, burn_in=burn, seed=seed)
            tag = f"tau{tau:g}_x{x0:g}".replace(".", "p").replace("-", "m")
            io.write_polygon(poly, os.path.join(out, f"tube_{tag}.csv"),
                             os.path.join(out, f"tube_{tag}.json"), provenance=prov)
    print(f"tube: wrote {len(taus) * len(x0s)} slice(s) to {out}")
    return 0


def _cmd_ci(cfg: dict, args) -> int:
    data, report, seed = _load_common(cfg)
    if data.p != 0:
        raise ConfigError("asymptotic intervals are not supported by the method for p > 0")
    u = np.array(_as_floats(_get(cfg, "direction", required=True)))
    u = u / np.linalg.norm(u)
    direction = Direction(u=u, tau=float(_get(cfg, "tau", required=True)))
    draws, burn = _sampler_settings(cfg)
    prior = _prior_from_config(cfg, data.k)
    chain = gibbs_unconditional(data, direction, prior, n_draws=draws, burn_in=burn, seed=seed)
    level = float(_get(cfg, "level", "0.95"))
    ci = asymptotic_ci(chain, data, direction, level=level)
    nci = naive_ci(chain, level=level)
    out = _out_dir(cfg, args)
    io.write_json(os.path.join(out, "ci.json"), {
        "names": list(ci.names),
        "estimate": [float(v) for v in ci.estimate],
        "std_error": [float(v) for v in ci.std_error],
        "lower": [float(v) for v in ci.lower],
        "upper": [float(v) for v in ci.upper],
        "naive_lower": [float(v) for v in nci.lower],
        "naive_upper": [float(v) for v in nci.upper],
        "level": level,
        "provenance": io.provenance_block(cfg, seed),
        "ingest": report,
    })
    print(f"ci: wrote ci.json to {out}")
    return 0


def _cmd_simulate(cfg: dict, args) -> int:
    profile = _get(cfg, "profile", "desk")
    if profile == "desk":
        config = simlab.DESK_PROFILE
    elif profile == "paper":
        config = simlab.PAPER_PROFILE
    else:
        raise ConfigError(f"unknown profile {profile!r} (use desk or paper)")
    overrides = {}
    if "replications" in cfg:
        overrides["replications"] = int(cfg["replications"])
    if "sample_sizes" in cfg:
        overrides["sample_sizes"] = tuple(int(v) for v in _as_floats(cfg["sample_sizes"]))
    if "master_seed" in cfg:
        overrides["master_seed"] = int(cfg["master_seed"])
    if overrides:
        config = replace(config, **overrides)
    workers = int(_get(cfg, "threads", str(args.threads)))
    out = _out_dir(cfg, args)
    prov = io.provenance_block(cfg, config.master_seed)

    which = set(_as_list(_get(cfg, "tables", "rmse,subgradient,coverage,conditional")))
    if "rmse" in which:
        rows = simlab.rmse_experiment(config, workers=workers)
        io.write_table_csv(os.path.join(out, "rmse.csv"), rows)
    if "subgradient" in which:
        rows = simlab.subgradient_experiment(config, workers=workers)
        io.write_table_csv(os.path.join(out, "subgradient.csv"), rows)
    if "coverage" in which:
        cov_cfg = replace(config, dgps=tuple(d for d in config.dgps if d != 4))
        rows = simlab.coverage_experiment(cov_cfg, workers=workers)
        io.write_table_csv(os.path.join(out, "coverage.csv"), rows)
    if "conditional" in which:
        rows = simlab.conditional_rmse_experiment(config, workers=workers)
        io.write_table_csv(os.path.join(out, "conditional.csv"), rows)
    io.write_json(os.path.join(out, "provenance.json"), prov)
    print(f"simulate: wrote tables to {out}")
    return 0


def _cmd_elicit(cfg: dict, args) -> int:
    tau = float(_get(cfg, "tau", required=True))
    family = _get(cfg, "family", "standard-normal")
    k = int(_get(cfg, "k", "2"))
    p = int(_get(cfg, "p", "0"))
    radius = _get(cfg, "radius", None)
    prior = spherical_prior(
        tau, family, k, p,
        alpha_variance=float(_get(cfg, "alpha_variance", "1000")),
        beta_variance=float(_get(cfg, "beta_variance", "1000")),
        radius=float(radius) if radius is not None else None,
    )
    out = _out_dir(cfg, args)
    io.write_json(os.path.join(out, "prior.json"), {
        "tau": prior.tau,
        "family": prior.family,
        "radius": prior.radius,
        "mean": [float(v) for v in prior.spec.mean],
        "covariance_diag": [float(v) for v in np.diag(prior.spec.covariance)],
        "parameter_order": "beta_y, beta_x, alpha",
        "provenance": io.provenance_block(cfg, None),
    })
    # config snippet in the grammar the fit/ci commands read
    mean_line = ", ".join(repr(float(v)) for v in prior.spec.mean)
    var_line = ", ".join(repr(float(v)) for v in np.diag(prior.spec.covariance))
    io.atomic_write_text(
        os.path.join(out, "prior.cfg"),
        f"prior_mean = {mean_line}\nprior_variance = {var_line}\n",
    )
    print(f"elicit: wrote prior.json and prior.cfg to {out}")
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "contour": _cmd_contour,
    "tube": _cmd_tube,
    "ci": _cmd_ci,
    "simulate": _cmd_simulate,
    "elicit": _cmd_elicit,
}


def run(command: str, cfg: dict, args) -> int:
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    return _COMMANDS[command](cfg, args)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dirquant",
        description="Bayesian multiple-output directional quantile regression",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override or supply a single config entry")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker cap for parallel cells")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config_file(args.config) if args.config else {}
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            key, value = item.split("=", 1)
            cfg[key.strip()] = value.strip()
        return run(args.command, cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except DirquantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
