"""Command-line front end: figure presets and direct access to the
analytic/Monte Carlo operations.

All dB <-> linear conversions live here and nowhere else.  Output is CSV
(default) or JSON-lines; diagnostics go to stderr, controlled by the
NCWISHART_DIAG environment variable (0 = warnings only, 1 = info,
2 = debug).  Exit code 0 means every requested computation converged;
quadrature-convergence failures exit 3.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import sys
import warnings

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import click
import numpy as np

from .model import RiceanChannel, mean_from_singulars, spectrum_from_channel
from . import eigdist, perf
from .eigdist import ConditioningWarning
from .quadrature import QuadratureWarning
from .mcsim import McRun, empirical_eig_cdfs, empirical_ser, empirical_outage

DIAG_ENV = "NCWISHART_DIAG"

log = logging.getLogger("ncwishart")


def _setup_logging():
    level = {"": logging.WARNING, "0": logging.WARNING, "1": logging.INFO}.get(
        os.environ.get(DIAG_ENV, ""), logging.DEBUG
    )
    logging.basicConfig(stream=sys.stderr, level=level, force=True,
                        format="ncwishart: %(levelname)s %(message)s")


def _db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def _load_config(path):
    if path is None:
        return {}
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise click.UsageError(f"{path}: {exc}") from exc


def _require(cfg, section, field=None):
    sec = cfg.get(section)
    if sec is None:
        raise click.UsageError(f"config section [{section}] is required")
    if field is None:
        return sec
    if field not in sec:
        raise click.UsageError(f"config field [{section}] {field} is required")
    return sec[field]


def _channel_from_cfg(cfg) -> RiceanChannel:
    ch = _require(cfg, "channel")
    try:
        n, m = int(ch["n"]), int(ch["m"])
    except KeyError as exc:
        raise click.UsageError(f"[channel] missing field {exc}") from exc
    K_dB = ch.get("K_dB")
    K = 0.0 if K_dB is None else _db_to_linear(float(K_dB))
    with warnings.catch_warnings(record=True) as wlog:
        warnings.simplefilter("always")
        if "hbar_file" in ch:
            path = ch["hbar_file"]
            Hbar = np.load(path) if path.endswith(".npy") else np.loadtxt(path, dtype=complex)
        elif "sigmas" in ch:
            Hbar = mean_from_singulars(n, m, ch["sigmas"], seed=int(ch.get("hbar_seed", 0)))
        elif K == 0.0:
            Hbar = _rank1_mean(n, m, seed=int(ch.get("hbar_seed", 0)))  # unused when K=0
        else:
            raise click.UsageError(
                "[channel] needs 'sigmas' (+ optional hbar_seed) or 'hbar_file'"
            )
        try:
            chan = RiceanChannel(n, m, K, Hbar)
        except (ValueError, TypeError) as exc:
            raise click.UsageError(f"[channel] {exc}") from exc
    for w in wlog:
        log.info("%s", w.message)
    return chan


def _rank1_mean(n, m, seed=0):
    return mean_from_singulars(n, m, [math.sqrt(n * m)], seed=seed)


def _grid_from_cfg(node, name) -> np.ndarray:
    if node is None:
        raise click.UsageError(f"config field [sweep] {name} is required")
    if isinstance(node, dict):
        try:
            start, stop, num = float(node["start"]), float(node["stop"]), int(node["num"])
        except KeyError as exc:
            raise click.UsageError(f"[sweep] {name} needs start/stop/num, missing {exc}")
        if num < 1:
            raise click.UsageError(f"[sweep] {name}: empty grid (num = {num})")
        if node.get("log", False):
            return np.logspace(math.log10(start), math.log10(stop), num)
        return np.linspace(start, stop, num)
    grid = np.asarray(node, dtype=float).ravel()
    if grid.size == 0:
        raise click.UsageError(f"[sweep] {name}: empty grid")
    return grid


def _mods_from_cfg(mb, r):
    names = mb.get("modulations", "bpsk")
    if isinstance(names, str):
        names = [names] * r
    if len(names) != r:
        raise click.UsageError(f"[mb] modulations: expected {r} entries, got {len(names)}")
    try:
        return tuple(perf.modulation_by_name(str(s)) for s in names)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _mb_from_cfg(cfg, P: float) -> perf.MBConfig:
    mb = cfg.get("mb", {})
    r = int(mb.get("r", 1))
    mods = _mods_from_cfg(mb, r)
    if "powers" in mb:
        powers = np.asarray(mb["powers"], dtype=float)
        if powers.size != r:
            raise click.UsageError(f"[mb] powers: expected {r} entries")
        powers = tuple(powers * (P / powers.sum()))
    else:
        powers = (P / r,) * r
    try:
        return perf.MBConfig(r=r, powers=powers, P=P, mods=mods)
    except ValueError as exc:
        raise click.UsageError(f"[mb] {exc}") from exc


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def _fmt_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _emit(rows, header, out, fmt):
    """Write rows (dicts) with a fixed column order."""
    sink = sys.stdout if out in (None, "-") else open(out, "w", newline="")
    try:
        if fmt == "jsonl":
            for r in rows:
                sink.write(json.dumps({k: r.get(k) for k in header}) + "\n")
        else:
            w = csv.writer(sink)
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt_cell(r.get(k)) for k in header])
    finally:
        if sink is not sys.stdout:
            sink.close()
    if out not in (None, "-"):
        log.info("wrote %d rows to %s", len(rows), out)


class _DiagCapture:
    """Routes numerical warnings to the diagnostics stream and records
    whether any of them signal non-convergence."""

    def __init__(self):
        self.failed = False

    def __enter__(self):
        self._ctx = warnings.catch_warnings(record=True)
        self._log = self._ctx.__enter__()
        warnings.simplefilter("always")
        return self

    def __exit__(self, *exc):
        self._ctx.__exit__(*exc)
        for w in self._log:
            if issubclass(w.category, QuadratureWarning):
                self.failed = True
                log.error("quadrature did not converge: %s", w.message)
            elif issubclass(w.category, ConditioningWarning):
                log.info("%s", w.message)
            else:
                log.debug("%s: %s", w.category.__name__, w.message)
        return False


def _finish(diag: _DiagCapture):
    if diag.failed:
        sys.exit(3)


# ---------------------------------------------------------------------------
# command group
# ---------------------------------------------------------------------------

def _common_options(f):
    opts = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="TOML experiment description."),
        click.option("--out", default=None, help="Output path (default stdout)."),
        click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), default="csv"),
        click.option("--seed", type=int, default=None, help="MC seed override."),
        click.option("--samples", type=int, default=None, help="MC sample-count override (0 disables MC)."),
        click.option("--workers", type=int, default=None, help="MC worker threads."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _mc_settings(cfg, seed, samples, workers, default_samples=0):
    mc = cfg.get("mc", {})
    return (
        int(seed if seed is not None else mc.get("seed", 12345)),
        int(samples if samples is not None else mc.get("samples", default_samples)),
        int(workers if workers is not None else mc.get("workers", 1)),
    )


class _usage_errors:
    """Turn library validation errors into clean usage errors (exit 2)."""

    def __enter__(self):
        return self

    def __exit__(self, etype, exc, tb):
        if etype is not None and issubclass(etype, (ValueError, ArithmeticError)):
            raise click.UsageError(str(exc)) from exc
        return False


@click.group()
@click.version_option(package_name="ncwishart")
def main():
    """Ordered-eigenvalue distributions of noncentral Wishart matrices and
    MIMO beamforming performance built on them."""
    _setup_logging()


# ---------------------------------------------------------------------------
# cdf / mc
# ---------------------------------------------------------------------------

_CDF_HEADER = ["x", "k", "analytic_cdf", "mc_cdf"]


def _run_cdf(ch, xs, ks, seed, samples, workers, out, fmt, analytic=True):
    rows = []
    with _DiagCapture() as diag:
        emp = None
        if samples > 0:
            run = McRun(ch, seed=seed, n_samples=samples, workers=workers)
            emp = empirical_eig_cdfs(run)
            log.info("sampled %d channel draws", samples)
        for k in ks:
            analytic_vals = eigdist.singular_value_cdf(ch, k, xs) if analytic else None
            for idx, x in enumerate(xs):
                row = {"x": float(x), "k": k, "analytic_cdf": None, "mc_cdf": None}
                if analytic:
                    row["analytic_cdf"] = float(analytic_vals[idx])
                if emp is not None:
                    phi = (ch.K + 1.0) * x * x  # singular value -> eigenvalue
                    row["mc_cdf"] = float(emp[k - 1](phi))
                rows.append(row)
    header = [h for h in _CDF_HEADER if h != "mc_cdf" or samples > 0]
    if not analytic:
        header = [h for h in header if h != "analytic_cdf"]
    _emit(rows, header, out, fmt)
    _finish(diag)


@main.command()
@_common_options
def cdf(config_path, out, fmt, seed, samples, workers):
    """Analytic (and optionally MC) CDFs of the ordered singular values."""
    cfg = _load_config(config_path)
    if not cfg:
        raise click.UsageError("cdf needs --config with [channel] and [sweep] x")
    ch = _channel_from_cfg(cfg)
    xs = _grid_from_cfg(cfg.get("sweep", {}).get("x"), "x")
    s = min(ch.n, ch.m)
    ks = cfg.get("sweep", {}).get("k", list(range(1, s + 1)))
    ks = [int(k) for k in (ks if isinstance(ks, list) else [ks])]
    seed, samples, workers = _mc_settings(cfg, seed, samples, workers)
    with _usage_errors():
        _run_cdf(ch, xs, ks, seed, samples, workers, out, fmt)


@main.command()
@_common_options
def mc(config_path, out, fmt, seed, samples, workers):
    """Empirical singular-value CDFs only (no analytic columns)."""
    cfg = _load_config(config_path)
    if not cfg:
        raise click.UsageError("mc needs --config with [channel]")
    ch = _channel_from_cfg(cfg)
    seed, samples, workers = _mc_settings(cfg, seed, samples, workers, default_samples=100_000)
    if samples <= 0:
        raise click.UsageError("mc requires a positive --samples")
    sweep = cfg.get("sweep", {})
    if sweep.get("x") is not None:
        xs = _grid_from_cfg(sweep.get("x"), "x")
    else:
        xs = np.linspace(0.0, 2.0 * math.sqrt(max(ch.n, ch.m)), 201)
    s = min(ch.n, ch.m)
    with _usage_errors():
        _run_cdf(ch, xs, list(range(1, s + 1)), seed, samples, workers, out, fmt,
                 analytic=False)


# ---------------------------------------------------------------------------
# ser
# ---------------------------------------------------------------------------

_SER_HEADER = ["P_dB", "k", "exact", "high_snr", "mc", "mc_se"]


def _run_ser(ch, cfg, P_dBs, seed, samples, workers, out, fmt, extra=None):
    spec = spectrum_from_channel(ch)
    rows = []
    with _DiagCapture() as diag:
        run = None
        if samples > 0:
            run = McRun(ch, seed=seed, n_samples=samples, workers=workers)
        for P_dB in P_dBs:
            P = _db_to_linear(P_dB)
            mb = _mb_from_cfg(cfg, P)
            mcres = empirical_ser(run, mb) if run is not None else None
            uniform = mb.is_uniform
            for k in range(1, mb.r + 1):
                row = {
                    "P_dB": float(P_dB), "k": str(k),
                    "exact": perf.ser_subchannel(spec, ch, mb, k),
                    "high_snr": perf.ser_high_snr(spec, ch, mb, k) if uniform else None,
                    "mc": float(mcres.per_k[k - 1]) if mcres else None,
                    "mc_se": float(mcres.per_k_se[k - 1]) if mcres else None,
                }
                if extra:
                    row.update(extra)
                rows.append(row)
            row = {
                "P_dB": float(P_dB), "k": "global",
                "exact": perf.ser_global(spec, ch, mb),
                "high_snr": perf.ser_global_high_snr(spec, ch, mb) if uniform else None,
                "mc": float(mcres.combined) if mcres else None,
                "mc_se": float(mcres.combined_se) if mcres else None,
            }
            if extra:
                row.update(extra)
            rows.append(row)
            log.info("P = %g dB done", P_dB)
    header = list(_SER_HEADER)
    if extra:
        header = list(extra.keys()) + header
    if samples <= 0:
        header = [h for h in header if h not in ("mc", "mc_se")]
    return rows, header, diag


@main.command()
@_common_options
def ser(config_path, out, fmt, seed, samples, workers):
    """Exact, high-SNR, and MC symbol error rates per subchannel."""
    cfg = _load_config(config_path)
    if not cfg:
        raise click.UsageError("ser needs --config with [channel], [mb], [sweep] P_dB")
    ch = _channel_from_cfg(cfg)
    P_dBs = _grid_from_cfg(cfg.get("sweep", {}).get("P_dB"), "P_dB")
    seed, samples, workers = _mc_settings(cfg, seed, samples, workers)
    with _usage_errors():
        rows, header, diag = _run_ser(ch, cfg, P_dBs, seed, samples, workers, out, fmt)
    _emit(rows, header, out, fmt)
    _finish(diag)


# ---------------------------------------------------------------------------
# outage
# ---------------------------------------------------------------------------

_OUTAGE_HEADER = ["gamma_th_dB", "K_dB", "exact", "asymptotic", "mc", "ci_lo", "ci_hi"]


def _run_outage(ch, r, P, gamma_dBs, seed, samples, workers):
    spec = spectrum_from_channel(ch)
    gammas = _db_to_linear(np.asarray(gamma_dBs, dtype=float))
    if np.any(gammas <= 0):
        raise click.UsageError("gamma_th grid must be positive")
    K_dB = 10.0 * math.log10(ch.K) if ch.K > 0 else None
    rows = []
    with _DiagCapture() as diag:
        exact = perf.outage(spec, ch, r, P, gammas)
        asym = perf.outage_asymptotic(ch, gammas, P) if r == 1 else None
        mcres = None
        if samples > 0:
            run = McRun(ch, seed=seed, n_samples=samples, workers=workers)
            mcres = empirical_outage(run, r, P, gammas)
        for i, g_dB in enumerate(gamma_dBs):
            rows.append({
                "gamma_th_dB": float(g_dB), "K_dB": K_dB,
                "exact": float(exact[i]),
                "asymptotic": float(asym[i]) if asym is not None else None,
                "mc": float(mcres.freq[i]) if mcres else None,
                "ci_lo": float(mcres.lo[i]) if mcres else None,
                "ci_hi": float(mcres.hi[i]) if mcres else None,
            })
    return rows, diag


@main.command()
@_common_options
def outage(config_path, out, fmt, seed, samples, workers):
    """Exact/asymptotic/MC outage probability of the weakest active subchannel."""
    cfg = _load_config(config_path)
    if not cfg:
        raise click.UsageError("outage needs --config with [channel], [sweep] gamma_th_dB")
    ch = _channel_from_cfg(cfg)
    sweep = cfg.get("sweep", {})
    gamma_dBs = _grid_from_cfg(sweep.get("gamma_th_dB"), "gamma_th_dB")
    mb = cfg.get("mb", {})
    r = int(mb.get("r", 1))
    P = _db_to_linear(float(mb.get("P_dB", 0.0)))
    seed, samples, workers = _mc_settings(cfg, seed, samples, workers)
    with _usage_errors():
        rows, diag = _run_outage(ch, r, P, gamma_dBs, seed, samples, workers)
    header = [h for h in _OUTAGE_HEADER
              if h not in ("mc", "ci_lo", "ci_hi") or samples > 0]
    _emit(rows, header, out, fmt)
    _finish(diag)


# ---------------------------------------------------------------------------
# coeffs
# ---------------------------------------------------------------------------

_COEFFS_HEADER = ["k", "d_k", "G_d", "log_a_k", "G_a"]


@main.command()
@_common_options
def coeffs(config_path, out, fmt, seed, samples, workers):
    """Small-argument expansion data: diversity order and array gain per subchannel."""
    cfg = _load_config(config_path)
    if not cfg:
        raise click.UsageError("coeffs needs --config with [channel]")
    ch = _channel_from_cfg(cfg)
    spec = spectrum_from_channel(ch)
    mb = cfg.get("mb", {})
    r = int(mb.get("r", spec.s))
    mods = _mods_from_cfg(mb, r)
    with _usage_errors():
        mbc = perf.MBConfig(r=r, powers=(1.0 / r,) * r, P=1.0, mods=mods)
    rows = []
    with _DiagCapture() as diag, _usage_errors():
        for k in range(1, spec.s + 1):
            c = eigdist.asymptotic_coeffs(spec, k)
            ga = perf.array_gain(spec, ch, mbc, k) if k <= r else None
            rows.append({
                "k": k, "d_k": c.d, "G_d": perf.diversity_order(spec, k),
                "log_a_k": c.log_a, "G_a": ga,
            })
    _emit(rows, _COEFFS_HEADER, out, fmt)
    _finish(diag)


# ---------------------------------------------------------------------------
# figure presets
# ---------------------------------------------------------------------------

_SIGMAS_RANK3 = [2.9751, 2.2840, 0.9657]
_HBAR_SEED = 7


def _preset_channel(K_dB, rank1=False):
    with warnings.catch_warnings(record=True) as wlog:
        warnings.simplefilter("always")
        if rank1:
            Hbar = _rank1_mean(3, 5, seed=_HBAR_SEED)
        else:
            Hbar = mean_from_singulars(3, 5, _SIGMAS_RANK3, seed=_HBAR_SEED)
    for w in wlog:
        log.info("%s", w.message)
    K = _db_to_linear(K_dB) if K_dB is not None else 0.0
    return RiceanChannel(3, 5, K, Hbar)


@main.command()
@_common_options
def fig1(config_path, out, fmt, seed, samples, workers):
    """Ordered singular-value CDFs, 3x5, K = 10 dB, rank-3 mean."""
    cfg = _load_config(config_path)
    ch = _preset_channel(10.0)
    seed, samples, workers = _mc_settings(cfg, seed, samples, workers,
                                          default_samples=100_000)
    xs = np.linspace(0.05, 4.5, 90)
    _run_cdf(ch, xs, [1, 2, 3], seed, samples, workers, out, fmt)


_FIG2_HEADER = ["x", "K_dB", "rank_label", "analytic_cdf"]


@main.command()
@_common_options
def fig2(config_path, out, fmt, seed, samples, workers):
    """Smallest singular-value CDF: rank-1 vs rank-3 mean, K sweep, Rayleigh
    reference.  The rank-1 curves are qualitative (mean direction seeded,
    not published)."""
    xs = np.linspace(0.02, 2.2, 56)
    rows = []
    with _DiagCapture() as diag:
        for rank1, label in ((False, "rank3"), (True, "rank1")):
            for K_dB in (-10.0, 0.0, 10.0):
                ch = _preset_channel(K_dB, rank1=rank1)
                vals = eigdist.singular_value_cdf(ch, 3, xs)
                rows += [{"x": float(x), "K_dB": K_dB, "rank_label": label,
                          "analytic_cdf": float(v)} for x, v in zip(xs, vals)]
        ch = _preset_channel(None)
        vals = eigdist.singular_value_cdf(ch, 3, xs)
        rows += [{"x": float(x), "K_dB": None, "rank_label": "rayleigh",
                  "analytic_cdf": float(v)} for x, v in zip(xs, vals)]
    _emit(rows, _FIG2_HEADER, out, fmt)
    _finish(diag)


@main.command()
@_common_options
def fig3(config_path, out, fmt, seed, samples, workers):
    """Per-subchannel and combined SER, BPSK x3, uniform power, K = 0 dB."""
    cfg = _load_config(config_path)
    ch = _preset_channel(0.0)
    seed, samples, workers = _mc_settings(cfg, seed, samples, workers,
                                          default_samples=200_000)
    P_dBs = np.arange(0.0, 25.0 + 1e-9, 2.5)
    mbcfg = {"mb": {"r": 3, "modulations": "bpsk"}}
    rows, header, diag = _run_ser(ch, mbcfg, P_dBs, seed, samples, workers, out, fmt)
    _emit(rows, header, out, fmt)
    _finish(diag)


@main.command()
@_common_options
def fig4(config_path, out, fmt, seed, samples, workers):
    """Combined SER at 3 bits/s/Hz: r=1 8PSK, r=2 QPSK+BPSK, r=3 BPSK x3."""
    cfg = _load_config(config_path)
    ch = _preset_channel(0.0)
    seed, samples, workers = _mc_settings(cfg, seed, samples, workers,
                                          default_samples=200_000)
    P_dBs = np.arange(0.0, 25.0 + 1e-9, 2.5)
    layouts = {
        1: ["8psk"],
        2: ["qpsk", "bpsk"],
        3: ["bpsk", "bpsk", "bpsk"],
    }
    all_rows = []
    header = None
    failed = False
    for r, mods in layouts.items():
        mbcfg = {"mb": {"r": r, "modulations": mods}}
        rows, header, diag = _run_ser(ch, mbcfg, P_dBs, seed, samples, workers,
                                      out, fmt, extra={"r": r})
        all_rows += [row for row in rows if row["k"] == "global"]
        failed = failed or diag.failed
    _emit(all_rows, header, out, fmt)
    if failed:
        sys.exit(3)


@main.command()
@_common_options
def fig5(config_path, out, fmt, seed, samples, workers):
    """Outage probability of the strongest eigenmode, K sweep, P = 0 dB."""
    cfg = _load_config(config_path)
    seed, samples, workers = _mc_settings(cfg, seed, samples, workers,
                                          default_samples=100_000)
    gamma_dBs = np.arange(-30.0, 10.0 + 1e-9, 1.0)
    rows = []
    failed = False
    for K_dB in (-10.0, 0.0, 10.0):
        ch = _preset_channel(K_dB)
        part, diag = _run_outage(ch, 1, 1.0, gamma_dBs, seed, samples, workers)
        rows += part
        failed = failed or diag.failed
    _emit(rows, _OUTAGE_HEADER, out, fmt)
    if failed:
        sys.exit(3)


if __name__ == "__main__":
    main()
