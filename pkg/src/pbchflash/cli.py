"""Command-line front end.

Every subcommand writes one CSV table. Settings resolve in three layers:
command-line flag, then ``key = value`` lines from ``--config FILE``, then the
built-in defaults (the SLC operating point of :class:`ChannelParams`). List
settings take comma-separated values. Without ``--output`` the CSV goes to
``$PBCHFLASH_OUTPUT_DIR/<subcommand>.csv`` when that variable is set, and to
stdout otherwise.

Exit status: 0 on success, 2 for command-line usage errors (unknown flags),
3 for invalid configuration or parameters, 4 when the output cannot be
written.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass, fields
from typing import Any, Callable

import numpy as np

from . import codec, experiments, gf2, limits
from .channel import ChannelParams

OUTPUT_ENV = "PBCHFLASH_OUTPUT_DIR"
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_OUTPUT = 4


class ConfigError(ValueError):
    """Invalid configuration file or parameter combination."""


class OutputError(OSError):
    """The requested output location cannot be written."""


# -- settings ----------------------------------------------------------------

def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


@dataclass(frozen=True)
class Setting:
    key: str
    parse: Callable[[str], Any]
    help: str


_CHANNEL = [
    Setting("init_mean", float, "mean of the erased-state voltage"),
    Setting("init_std", float, "std of the erased-state voltage"),
    Setting("v_verify_s1", float, "program-verify level"),
    Setting("delta_vpp", float, "ISPP step"),
    Setting("gamma_x", float, "unscaled bitline-direction coupling ratio"),
    Setting("gamma_y", float, "unscaled wordline-direction coupling ratio"),
    Setting("gamma_xy", float, "unscaled diagonal coupling ratio"),
    Setting("alpha", float, "ICI strength factor"),
    Setting("sigma_read", float, "read-noise standard deviation"),
    Setting("eta", float, "read level"),
    Setting("eta_pre", float, "pre-read level"),
]
_RUN = [
    Setting("seed", int, "master seed"),
    Setting("trials", int, "trials per grid point"),
    Setting("batch_size", int, "trials simulated per batch"),
]
_SWEEP = _RUN + [
    Setting("min_failures", int, "stop an allocation after this many failures (0 disables)"),
    Setting("allocations", _int_list, "masking redundancies l to sweep (r = 100 - l)"),
]

_COMMANDS: dict[str, tuple[str, list[Setting]]] = {
    "limits": ("capacity grid for the stuck-at memory channel", [
        Setting("epsilon", _float_list, "defect probabilities"),
        Setting("p", _float_list, "crossover probabilities"),
    ]),
    "codec-check": ("construct codes and verify their defining identities", [
        Setting("allocations", _int_list, "masking redundancies l to check"),
    ]),
    "sweep-alpha": ("decoding-failure probability versus ICI strength", _CHANNEL + _SWEEP + [
        Setting("alphas", _float_list, "ICI strength factors"),
    ]),
    "sweep-preread": ("decoding-failure probability versus pre-read level", _CHANNEL + _SWEEP + [
        Setting("eta_pre_list", _float_list, "pre-read levels"),
    ]),
    "histogram": ("coded-wordline threshold-voltage histogram", _CHANNEL + _RUN + [
        Setting("l", int, "masking redundancy of the coded wordline"),
        Setting("bins", int, "number of histogram bins"),
        Setting("v_min", float, "lower histogram edge"),
        Setting("v_max", float, "upper histogram edge"),
    ]),
    "trial": ("one end-to-end trial, reported field by field", _CHANNEL + [
        Setting("seed", int, "master seed"),
        Setting("index", int, "trial index within the seed's stream"),
        Setting("l", int, "masking redundancy"),
    ]),
}

_BASE = ChannelParams()
_CHANNEL_DEFAULTS = {
    "init_mean": _BASE.init_mean,
    "init_std": _BASE.init_std,
    "v_verify_s1": _BASE.v_verify_s1,
    "delta_vpp": _BASE.delta_vpp,
    "gamma_x": _BASE.gamma_base[0],
    "gamma_y": _BASE.gamma_base[1],
    "gamma_xy": _BASE.gamma_base[2],
    "alpha": _BASE.alpha,
    "sigma_read": _BASE.sigma_read,
    "eta": _BASE.eta,
    "eta_pre": _BASE.eta_pre,
}
_ALL_L = tuple(l for l, _ in codec.ALLOCATIONS)

DEFAULTS: dict[str, dict[str, Any]] = {
    "limits": {
        "epsilon": tuple(round(0.05 * i, 2) for i in range(11)),
        "p": (0.0, 0.001, 0.01, 0.05, 0.1),
    },
    "codec-check": {"allocations": _ALL_L},
    "sweep-alpha": {
        **_CHANNEL_DEFAULTS, "seed": 0, "trials": 100_000, "batch_size": 500, "min_failures": 100,
        "allocations": _ALL_L, "alphas": experiments.DEFAULT_ALPHAS,
    },
    "sweep-preread": {
        **_CHANNEL_DEFAULTS, "seed": 0, "trials": 100_000, "batch_size": 500, "min_failures": 100,
        "allocations": _ALL_L, "eta_pre_list": experiments.DEFAULT_ETA_PRE,
    },
    "histogram": {
        **_CHANNEL_DEFAULTS, "sigma_read": 0.3, "seed": 0, "trials": 1000, "batch_size": 500,
        "l": 100, "bins": 120, "v_min": -7.0, "v_max": 5.0,
    },
    "trial": {**_CHANNEL_DEFAULTS, "seed": 0, "index": 0, "l": 10},
}


def read_config(path: str, command: str) -> dict[str, Any]:
    """Parse a flat ``key = value`` file, keeping only keys known to ``command``."""
    known = {s.key: s for s in _COMMANDS[command][1]}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    out: dict[str, Any] = {}
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("-", "_"), value.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{num}: expected 'key = value'")
        if key not in known:
            raise ConfigError(f"{path}:{num}: unknown setting '{key}' for {command}")
        try:
            out[key] = known[key].parse(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{num}: bad value for '{key}': {value!r}") from exc
    return out


def resolve(command: str, flags: dict[str, Any], config_path: str | None) -> dict[str, Any]:
    """Merge defaults, config file and flags (later layers win)."""
    settings = dict(DEFAULTS[command])
    if config_path is not None:
        settings.update(read_config(config_path, command))
    settings.update({k: v for k, v in flags.items() if v is not None})
    return settings


def channel_params(s: dict[str, Any]) -> ChannelParams:
    try:
        return ChannelParams(
            init_mean=s["init_mean"], init_std=s["init_std"], v_verify_s1=s["v_verify_s1"],
            delta_vpp=s["delta_vpp"], gamma_base=(s["gamma_x"], s["gamma_y"], s["gamma_xy"]),
            alpha=s["alpha"], sigma_read=s["sigma_read"], eta=s["eta"], eta_pre=s["eta_pre"],
        )
    except ValueError as exc:
        raise ConfigError(f"invalid channel parameters: {exc}") from exc


def _allocations(ls) -> tuple[tuple[int, int], ...]:
    if not ls:
        raise ConfigError("no allocations given")
    out = []
    for l in ls:
        if l not in _ALL_L:
            raise ConfigError(f"allocation l={l} is not one of {_ALL_L}")
        out.append((l, 100 - l))
    return tuple(out)


def _positive(s: dict[str, Any], *keys: str) -> None:
    for key in keys:
        if s[key] < 1:
            raise ConfigError(f"{key} must be >= 1, got {s[key]}")


def _seed(s: dict[str, Any]) -> None:
    if s["seed"] < 0:
        raise ConfigError(f"seed must be non-negative, got {s['seed']}")


# -- commands ------------------------------------------------------------------

def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _f(x: float) -> str:
    return f"{x:.6f}"


def cmd_limits(s: dict[str, Any]) -> str:
    rows = []
    for eps in s["epsilon"]:
        for p in s["p"]:
            try:
                cap = limits.defect_capacities(eps, p)
            except ValueError as exc:
                raise ConfigError(f"invalid capacity input (epsilon={eps}, p={p}): {exc}") from exc
            rows.append([_f(eps), _f(p), _f(cap.c_min_plus), _f(cap.c_max_plus)])
    return _csv(("epsilon", "p", "c_min_plus", "c_max_plus"), rows)


def cmd_codec_check(s: dict[str, Any]) -> str:
    rows = []
    for l, r in _allocations(s["allocations"]):
        code = codec.allocation_code(l)
        G = code.G_tilde
        checks = (
            not np.any(gf2.matmul(code.H_tilde.T, G)),
            np.array_equal(gf2.matmul(code.G1_inv.T, code.G1), np.eye(code.k, dtype=np.uint8)),
            not np.any(gf2.matmul(code.G1_inv.T, code.G0)),
            gf2.rank(G.T) == code.k + code.l,
        )
        rows.append([l, r, code.k, code.t_correct, *(int(c) for c in checks), int(all(checks))])
    return _csv(("l", "r", "k", "t_correct", "parity_check", "left_inverse", "masking_kernel",
                 "full_rank", "ok"), rows)


def _sweep_kwargs(s: dict[str, Any]) -> dict[str, Any]:
    _positive(s, "trials", "batch_size")
    _seed(s)
    if s["min_failures"] < 0:
        raise ConfigError("min_failures must be non-negative")
    return dict(
        allocations=_allocations(s["allocations"]), trials=s["trials"], seed=s["seed"],
        min_failures=s["min_failures"] or None, batch_size=s["batch_size"],
    )


def cmd_sweep_alpha(s: dict[str, Any]) -> str:
    params = channel_params(s)
    kw = _sweep_kwargs(s)
    if not s["alphas"] or min(s["alphas"]) < 0:
        raise ConfigError("alphas must be a non-empty list of non-negative values")
    return experiments.sweep_allocation(params, alphas=s["alphas"], **kw).to_csv()


def cmd_sweep_preread(s: dict[str, Any]) -> str:
    params = channel_params(s)
    kw = _sweep_kwargs(s)
    if not s["eta_pre_list"]:
        raise ConfigError("eta_pre_list is empty")
    try:
        result = experiments.sweep_preread(params, eta_pre_list=s["eta_pre_list"], **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return result.to_csv()


def cmd_histogram(s: dict[str, Any]) -> str:
    params = channel_params(s)
    _positive(s, "trials", "batch_size", "bins")
    _seed(s)
    if not s["v_min"] < s["v_max"]:
        raise ConfigError("v_min must be below v_max")
    (alloc,) = _allocations([s["l"]])
    hist = experiments.emit_histogram(
        params, allocation=alloc, trials=s["trials"], bins=s["bins"], seed=s["seed"],
        v_range=(s["v_min"], s["v_max"]), batch_size=s["batch_size"],
    )
    return hist.to_csv()


def cmd_trial(s: dict[str, Any]) -> str:
    params = channel_params(s)
    _seed(s)
    if s["index"] < 0:
        raise ConfigError("index must be non-negative")
    (alloc,) = _allocations([s["l"]])
    record = experiments.run_trial(codec.allocation_code(alloc[0]), params,
                                   experiments.trial_rng(s["seed"], s["index"]))
    rows = [["seed", s["seed"]], ["index", s["index"]]]
    for f in fields(record):
        v = getattr(record, f.name)
        rows.append([f.name, _f(v) if isinstance(v, float) else int(v)])
    return _csv(("field", "value"), rows)


_HANDLERS = {
    "limits": cmd_limits,
    "codec-check": cmd_codec_check,
    "sweep-alpha": cmd_sweep_alpha,
    "sweep-preread": cmd_sweep_preread,
    "histogram": cmd_histogram,
    "trial": cmd_trial,
}


# -- plumbing -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pbchflash",
        description="Partitioned-BCH defect masking on a simulated SLC flash channel.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (help_text, settings) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", metavar="FILE", help="flat 'key = value' settings file")
        p.add_argument("--output", "-o", metavar="PATH", help="CSV destination (default: stdout)")
        for st in settings:
            default = DEFAULTS[name][st.key]
            shown = ",".join(map(str, default)) if isinstance(default, tuple) else default
            p.add_argument(f"--{st.key.replace('_', '-')}", dest=st.key, type=st.parse, default=None,
                           help=f"{st.help} (default: {shown})")
    return parser


def _destination(command: str, output: str | None) -> str | None:
    if output is not None:
        return output
    directory = os.environ.get(OUTPUT_ENV)
    if directory:
        return os.path.join(directory, f"{command}.csv")
    return None


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write output file {path}: {exc.strerror}") from exc


def _check_writable(path: str | None) -> None:
    """Fail before a long simulation rather than after it."""
    if path is None:
        return
    parent = os.path.dirname(os.path.abspath(path))
    if os.path.isdir(path) or not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise OutputError(f"cannot write output file {path}: not a writable location")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = {st.key: getattr(args, st.key) for st in _COMMANDS[args.command][1]}
    try:
        settings = resolve(args.command, flags, args.config)
        dest = _destination(args.command, args.output)
        _check_writable(dest)
        text = _HANDLERS[args.command](settings)
        _write(text, dest)
    except ConfigError as exc:
        print(f"pbchflash: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"pbchflash: output error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
