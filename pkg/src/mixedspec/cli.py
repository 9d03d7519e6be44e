"""Config-driven command line front end.

Subcommands:

* ``kernel``     -- evaluate the Fejér kernel or the gamma-dependent
                    asymptotic variance factors (flags, no config)
* ``theory``     -- variance theory over a T grid -> CSV
* ``montecarlo`` -- empirical-variance campaigns -> CSV per variant
* ``approx``     -- resolution-product sweeps -> CSV per amplitude law
* ``doa``        -- broadband Capon MSE study -> CSV

Config files are JSON with a mandatory ``schema_version``; unknown fields
are rejected rather than ignored. Every run writes a manifest JSON next to
its outputs recording the command, config hash, seed, tool version, wall
time, and output paths. Outputs are deterministic given (config, seed) and
independent of ``--workers``.
"""

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .fejer import fejer, rho
from .spectra import spectrum_from_dict
from .signals import AmplitudeLaw
from .variance import (autocov_variance, autocov_variance_asymptotic,
                       autocov_variance_limit, crosscov_variance,
                       crosscov_variance_asymptotic, crosscov_variance_limit)
from .montecarlo import (Campaign, run_autocov_campaign, run_crosscov_campaign,
                         run_approx_sweep)
from .arrays import doa_mse_experiment
from .spectra import Band, flat_band_density, tabulated_density

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


def _check_keys(cfg, allowed, required, where):
    unknown = sorted(set(cfg) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown fields {unknown}")
    missing = sorted(set(required) - set(cfg))
    if missing:
        raise ConfigError(f"{where}: missing required fields {missing}")


def _load_config(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    with open(p, "rb") as fh:
        raw = fh.read()
    cfg = json.loads(raw.decode("utf-8"))
    if cfg.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(
            f"{p}: schema_version must be {SCHEMA_VERSION}, "
            f"got {cfg.get('schema_version')!r}")
    return cfg, hashlib.sha256(raw).hexdigest()


def _law_from_config(value):
    if isinstance(value, str):
        if value == "fixed":
            return AmplitudeLaw.fixed_magnitude()
        if value == "gaussian":
            return AmplitudeLaw.gaussian()
        raise ConfigError(f"unknown law name {value!r}")
    _check_keys(value, {"kind", "kurtosis"}, {"kind"}, "law")
    if value["kind"] == "two-point":
        return AmplitudeLaw.two_point(value["kurtosis"])
    return _law_from_config(value["kind"])


def _with_mass_kurtosis(spec_dict, kurtosis):
    out = json.loads(json.dumps(spec_dict))
    masses = out.get("masses", [])
    if np.isscalar(kurtosis):
        kurtosis = [kurtosis] * len(masses)
    if len(kurtosis) != len(masses):
        raise ConfigError("mass_kurtosis length does not match masses")
    for m, k in zip(masses, kurtosis):
        m["kurtosis"] = float(k)
    return out


def _write_manifest(out_dir, name, command, config_path, config_hash, seed,
                    outputs, t0):
    manifest = {
        "command": command,
        "config": str(config_path),
        "config_sha256": config_hash,
        "master_seed": seed,
        "tool_version": __version__,
        "wall_time_s": round(time.time() - t0, 3),
        "outputs": [str(p) for p in outputs],
    }
    path = Path(out_dir) / f"{name}_manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_kernel(args):
    if args.gamma is not None:
        if args.theta is not None or args.T is not None:
            raise ConfigError("give either --gamma or --theta with --T")
        r = rho(args.gamma)
        out = {"rho": r, "factor_fixed": r,
               "factor_gauss": args.gamma + r}
    elif args.theta is not None and args.T is not None:
        out = {"fejer": fejer(args.theta, args.T)}
    else:
        raise ConfigError("give either --gamma or --theta with --T")
    print(json.dumps(out))
    return 0


THEORY_KEYS = {"schema_version", "command", "name", "kind", "spec", "spec_x",
               "spec_y", "T_grid", "tau"}


def cmd_theory(args):
    t0 = time.time()
    cfg, digest = _load_config(args.config)
    _check_keys(cfg, THEORY_KEYS, {"schema_version", "name", "kind", "T_grid"},
                "theory config")
    kind = cfg["kind"]
    t_grid = [float(t) for t in cfg["T_grid"]]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{cfg['name']}.csv"
    with open(path, "w", newline="") as fh:
        fh.write("T,theory_finite,theory_asymptotic,theory_limit\n")
        if kind == "autocov":
            spec = spectrum_from_dict(cfg["spec"])
            for T in t_grid:
                fh.write(f"{T!r},{autocov_variance(spec, T)!r},"
                         f"{autocov_variance_asymptotic(spec, T)!r},"
                         f"{autocov_variance_limit(spec)!r}\n")
        elif kind == "crosscov":
            sx = spectrum_from_dict(cfg["spec_x"])
            sy = spectrum_from_dict(cfg["spec_y"])
            for T in t_grid:
                fh.write(f"{T!r},{crosscov_variance(sx, sy, T)!r},"
                         f"{crosscov_variance_asymptotic(sx, sy, T)!r},"
                         f"{crosscov_variance_limit(sx, sy)!r}\n")
        else:
            raise ConfigError(f"unknown theory kind {kind!r}")
    _write_manifest(out_dir, cfg["name"], "theory", args.config, digest,
                    None, [path], t0)
    return 0


MC_KEYS = {"schema_version", "command", "name", "scenario", "spec", "spec_x",
           "spec_y", "variants", "T_grid", "tau", "trials", "master_seed",
           "surrogate_oversample"}
VARIANT_KEYS = {"label", "spec", "spec_x", "spec_y", "mass_kurtosis",
                "mass_kurtosis_x", "mass_kurtosis_y"}


def cmd_montecarlo(args):
    t0 = time.time()
    cfg, digest = _load_config(args.config)
    _check_keys(cfg, MC_KEYS,
                {"schema_version", "name", "scenario", "T_grid", "trials"},
                "montecarlo config")
    scenario = cfg["scenario"]
    seed = args.seed if args.seed is not None else int(cfg.get("master_seed", 0))
    variants = cfg.get("variants", [{"label": "run"}])
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for variant in variants:
        _check_keys(variant, VARIANT_KEYS, {"label"}, "variant")
        if scenario == "autocov":
            spec_dict = variant.get("spec", cfg.get("spec"))
            if spec_dict is None:
                raise ConfigError("autocov variant needs a spec")
            if "mass_kurtosis" in variant:
                spec_dict = _with_mass_kurtosis(spec_dict,
                                                variant["mass_kurtosis"])
            campaign = Campaign(
                scenario="autocov", spec_x=spectrum_from_dict(spec_dict),
                T_grid=tuple(cfg["T_grid"]), tau=float(cfg.get("tau", 0.0)),
                trials=int(cfg["trials"]), master_seed=seed,
                surrogate_oversample=float(cfg.get("surrogate_oversample", 8.0)))
            result = run_autocov_campaign(campaign, workers=args.workers)
        elif scenario == "crosscov":
            sx = variant.get("spec_x", cfg.get("spec_x"))
            sy = variant.get("spec_y", cfg.get("spec_y"))
            if sx is None or sy is None:
                raise ConfigError("crosscov variant needs spec_x and spec_y")
            if "mass_kurtosis_x" in variant:
                sx = _with_mass_kurtosis(sx, variant["mass_kurtosis_x"])
            if "mass_kurtosis_y" in variant:
                sy = _with_mass_kurtosis(sy, variant["mass_kurtosis_y"])
            campaign = Campaign(
                scenario="crosscov", spec_x=spectrum_from_dict(sx),
                spec_y=spectrum_from_dict(sy),
                T_grid=tuple(cfg["T_grid"]), tau=float(cfg.get("tau", 0.0)),
                trials=int(cfg["trials"]), master_seed=seed,
                surrogate_oversample=float(cfg.get("surrogate_oversample", 8.0)))
            result = run_crosscov_campaign(campaign, workers=args.workers)
        else:
            raise ConfigError(f"unknown scenario {scenario!r}")
        path = out_dir / f"{cfg['name']}_{variant['label']}.csv"
        result.write_csv(path)
        outputs.append(path)
    _write_manifest(out_dir, cfg["name"], "montecarlo", args.config, digest,
                    seed, outputs, t0)
    return 0


APPROX_KEYS = {"schema_version", "command", "name", "density", "laws",
               "gamma_grid", "rule", "trials", "tau", "master_seed",
               "include_density_reference", "reference_T_grid"}


def _density_from_config(d):
    band = Band(center=float(d["band"]["center"]),
                bandwidth=float(d["band"]["bandwidth"]))
    if d["kind"] == "flat":
        return flat_band_density(band, float(d["power"]))
    if d["kind"] == "table":
        return tabulated_density(band, d["table"])
    raise ConfigError(f"unknown density kind {d['kind']!r}")


def cmd_approx(args):
    t0 = time.time()
    cfg, digest = _load_config(args.config)
    _check_keys(cfg, APPROX_KEYS,
                {"schema_version", "name", "density", "laws", "gamma_grid",
                 "rule"}, "approx config")
    density = _density_from_config(cfg["density"])
    seed = args.seed if args.seed is not None else int(cfg.get("master_seed", 0))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for law_cfg in cfg["laws"]:
        law = _law_from_config(law_cfg)
        label = law_cfg if isinstance(law_cfg, str) \
            else f"kappa{law.kurtosis:g}"
        result = run_approx_sweep(
            density, law, [float(g) for g in cfg["gamma_grid"]],
            rule=cfg["rule"], trials=int(cfg.get("trials", 0)),
            master_seed=seed, tau=float(cfg.get("tau", 0.0)),
            workers=args.workers)
        path = out_dir / f"{cfg['name']}_{label}.csv"
        result.write_csv(path)
        outputs.append(path)
    if cfg.get("include_density_reference"):
        from .spectra import MixedSpectrum
        spec = MixedSpectrum(density=density)
        t_grid = cfg.get("reference_T_grid")
        if t_grid is None:
            raise ConfigError(
                "include_density_reference needs reference_T_grid")
        path = out_dir / f"{cfg['name']}_density.csv"
        with open(path, "w", newline="") as fh:
            fh.write("T,theory_finite,theory_asymptotic,theory_limit\n")
            for T in [float(t) for t in t_grid]:
                fh.write(f"{T!r},{autocov_variance(spec, T)!r},"
                         f"{autocov_variance_asymptotic(spec, T)!r},"
                         f"{autocov_variance_limit(spec)!r}\n")
        outputs.append(path)
    _write_manifest(out_dir, cfg["name"], "approx", args.config, digest,
                    seed, outputs, t0)
    return 0


DOA_KEYS = {"schema_version", "command", "name", "gamma_grid", "laws", "runs",
            "snapshots", "snapshot_dt", "band", "angles_deg", "sensors",
            "snr_db", "source_power", "freq_points", "master_seed"}


def cmd_doa(args):
    t0 = time.time()
    cfg, digest = _load_config(args.config)
    _check_keys(cfg, DOA_KEYS,
                {"schema_version", "name", "gamma_grid", "laws", "runs"},
                "doa config")
    seed = args.seed if args.seed is not None else int(cfg.get("master_seed", 0))
    band_cfg = cfg.get("band", {"center": 0.25, "bandwidth": 1e-3})
    result = doa_mse_experiment(
        gamma_grid=[float(g) for g in cfg["gamma_grid"]],
        laws=tuple(cfg["laws"]),
        runs=int(cfg["runs"]),
        snapshots=int(cfg.get("snapshots", 50_000)),
        snapshot_dt=float(cfg.get("snapshot_dt", 1.0)),
        master_seed=seed,
        band=Band(center=float(band_cfg["center"]),
                  bandwidth=float(band_cfg["bandwidth"])),
        angles_deg=tuple(cfg.get("angles_deg", (-5.0, 10.0))),
        sensors=int(cfg.get("sensors", 10)),
        snr_db=cfg.get("snr_db", 10.0),
        source_power=float(cfg.get("source_power", 1.0)),
        freq_points=int(cfg.get("freq_points", 32)),
        workers=args.workers)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{cfg['name']}.csv"
    result.write_csv(path)
    _write_manifest(out_dir, cfg["name"], "doa", args.config, digest, seed,
                    [path], t0)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mixedspec",
        description="Variance laboratory for covariance estimates of "
                    "mixed-spectrum signals")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    kern = sub.add_parser("kernel", help="evaluate kernel values and factors")
    kern.add_argument("--gamma", type=float)
    kern.add_argument("--theta", type=float)
    kern.add_argument("--T", type=float)
    kern.set_defaults(func=cmd_kernel)

    for name, func, help_text in (
            ("theory", cmd_theory, "variance theory over a T grid"),
            ("montecarlo", cmd_montecarlo, "empirical variance campaign"),
            ("approx", cmd_approx, "resolution-product sweep"),
            ("doa", cmd_doa, "broadband Capon MSE study")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config master seed")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel trial workers (result-invariant)")
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical or IO failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
