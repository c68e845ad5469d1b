"""Command-line entry point: sweeps, convergence/lambda traces, oracle
comparison, and a self-contained validation suite."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, detectors as det, regparam
from .channel import (C_LIGHT, ChannelSpec, ImpairmentParams, draw_channel,
                      receive, transmit, trial_rng)
from .constellation import RealLinearModel, make_qam, random_symbols, stack_real
from .harness import (CONVERGENCE_HEADER, LAMBDA_HEADER, SWEEP_HEADER,
                      ExperimentSpec, noise_variance, run_convergence,
                      run_lambda_trace, run_sweep, write_csv)
from .l0core import l0_smooth, surrogate_value, update_pivots
from .ml_oracle import ml_detect

DETECTOR_NAMES = ("zf", "lmmse", "idls", "idls-noise", "idls-robust", "soav")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _parse_ebn0(text: str) -> tuple[float, ...]:
    if ":" in text:
        start, step, stop = (float(v) for v in text.split(":"))
        if step <= 0:
            raise ValueError("ebn0 step must be > 0")
        n = int(round((stop - start) / step)) + 1
        grid = tuple(start + k * step for k in range(n) if start + k * step <= stop + 1e-9)
        if not grid:
            raise ValueError("empty ebn0 range")
        return grid
    return tuple(float(v) for v in text.split(","))


def _parse_lambda(text: str) -> tuple[str, float | None]:
    if text in ("auto", "auto-once"):
        return text, None
    if text.startswith("fixed="):
        return "fixed", float(text[len("fixed="):])
    raise ValueError(f"bad --lambda value {text!r}")


def _parse_delta(text: str) -> tuple[str, float | None]:
    if text == "noise":
        return "noise", None
    if text.startswith("fixed="):
        return "fixed", float(text[len("fixed="):])
    raise ValueError(f"bad --delta value {text!r}")


def _db_to_linear(db: float | None) -> float:
    return 0.0 if db is None else 10.0 ** (db / 10.0)


def _add_common_flags(p: argparse.ArgumentParser):
    p.add_argument("--nt", type=int, default=32)
    p.add_argument("--nr", type=int, default=32)
    p.add_argument("--channel", choices=("iid", "jakes"), default="iid")
    p.add_argument("--spacing-wavelengths", type=float, default=None,
                   help="antenna spacing in carrier wavelengths (jakes model)")
    p.add_argument("--detector", default="idls",
                   help=f"comma list from {{{','.join(DETECTOR_NAMES)}}}")
    p.add_argument("--ebn0", default="8", help="start:step:stop or comma list, dB")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--target-errors", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--kmax", type=int, default=50)
    p.add_argument("--lambda", dest="lambda_spec", default="auto",
                   help="auto | auto-once | fixed=<v>")
    p.add_argument("--tau-db", type=float, default=None,
                   help="CSI error power tau^2 in dB (omit for perfect CSI)")
    p.add_argument("--eta-db", type=float, default=None,
                   help="transmit distortion power eta in dB")
    p.add_argument("--delta", default="noise", help="noise | fixed=<v>")
    p.add_argument("--bits", type=int, default=2, dest="bits_per_symbol",
                   help="bits per complex symbol (2 = QPSK, 4 = 16-QAM)")
    p.add_argument("--workers", type=int,
                   default=int(os.environ.get("IDLSIM_WORKERS", "1")))
    p.add_argument("--out", default="results")
    p.add_argument("--config", default=None,
                   help="key=value file providing flag defaults")


def _apply_config(argv: list[str]) -> list[str]:
    """Prepend --key value pairs from a config file so real flags override."""
    if "--config" not in argv:
        return argv
    path = argv[argv.index("--config") + 1]
    injected: list[str] = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        injected += [f"--{key.strip()}", value.strip()]
    # keep the subcommand first, then config-derived defaults, then real flags
    return argv[:1] + injected + argv[1:]


def _build_spec(args) -> ExperimentSpec:
    spacing = None
    if args.spacing_wavelengths is not None:
        spacing = args.spacing_wavelengths * C_LIGHT / 5e9
    channel = ChannelSpec(nt=args.nt, nr=args.nr,
                          model="jakes-correlated" if args.channel == "jakes" else "iid-rayleigh",
                          spacing_m=spacing)
    tau2 = _db_to_linear(args.tau_db)
    imp = ImpairmentParams(tau=float(np.sqrt(tau2)), eta=_db_to_linear(args.eta_db))
    lam_mode, lam_value = _parse_lambda(args.lambda_spec)
    delta_mode, delta_value = _parse_delta(args.delta)
    configs = []
    for name in args.detector.split(","):
        name = name.strip()
        if name not in DETECTOR_NAMES:
            raise ValueError(f"unknown detector {name!r}")
        configs.append(det.DetectorConfig(
            variant=name, alpha=args.alpha, lambda_mode=lam_mode,
            lambda_value=lam_value, eps=args.eps, k_max=args.kmax,
            delta_mode=delta_mode, delta_value=delta_value))
    return ExperimentSpec(
        channel=channel, impairments=imp, detectors=tuple(configs),
        ebn0_grid_db=_parse_ebn0(args.ebn0), trials=args.trials,
        target_bit_errors=args.target_errors, master_seed=args.seed,
        bits_per_symbol=args.bits_per_symbol, workers=args.workers)


def _write_manifest(out_dir: Path, args, spec: ExperimentSpec, extra=None):
    manifest = {
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        "seed": spec.master_seed,
        "command": " ".join(sys.argv[1:]),
        "nt": spec.channel.nt,
        "nr": spec.channel.nr,
        "gamma": spec.channel.nt / spec.channel.nr,
        "channel": spec.channel.model,
        "spacing_m": spec.channel.spacing_m,
        "detectors": [c.variant for c in spec.detectors],
        "ebn0_db": list(spec.ebn0_grid_db),
        "trials": spec.trials,
        "target_bit_errors": spec.target_bit_errors,
        "max_bits": spec.max_bits,
        "bits_per_symbol": spec.bits_per_symbol,
        "alpha": spec.detectors[0].alpha,
        "eps": spec.detectors[0].eps,
        "k_max": spec.detectors[0].k_max,
        "lambda_mode": spec.detectors[0].lambda_mode,
        "lambda_value": spec.detectors[0].lambda_value,
        "delta_mode": spec.detectors[0].delta_mode,
        "delta_value": spec.detectors[0].delta_value,
        "tau_db": args.tau_db,
        "eta_db": args.eta_db,
        "workers": spec.workers,
    }
    if extra:
        manifest.update(extra)
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)
        fh.write("\n")


def cmd_sweep(args) -> int:
    spec = _build_spec(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _, rows, soav_log = run_sweep(spec)
    write_csv(rows, SWEEP_HEADER, out_dir / "sweep.csv")
    extra = {"soav_lambda": {str(k): v for k, v in soav_log.items()}} if soav_log else None
    _write_manifest(out_dir, args, spec, extra)
    print(",".join(SWEEP_HEADER))
    for row in rows:
        print(",".join(f"{row[h]:.10g}" if isinstance(row[h], float) else str(row[h])
                       for h in SWEEP_HEADER))
    return EXIT_OK


def cmd_convergence(args) -> int:
    spec = _build_spec(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = run_convergence(spec, spec.ebn0_grid_db[0])
    write_csv(rows, CONVERGENCE_HEADER, out_dir / "convergence.csv")
    _write_manifest(out_dir, args, spec)
    print(f"wrote {len(rows)} convergence rows to {out_dir / 'convergence.csv'}")
    return EXIT_OK


def cmd_lambda_trace(args) -> int:
    spec = _build_spec(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = run_lambda_trace(spec, spec.ebn0_grid_db[0])
    write_csv(rows, LAMBDA_HEADER, out_dir / "lambda.csv")
    _write_manifest(out_dir, args, spec)
    print(f"wrote {len(rows)} lambda rows to {out_dir / 'lambda.csv'}")
    return EXIT_OK


def cmd_oracle_compare(args) -> int:
    spec = _build_spec(args)
    con = make_qam(spec.bits_per_symbol)
    trials = spec.trials or 1000
    ebn0 = spec.ebn0_grid_db[0]
    sigma2 = noise_variance(spec.channel.nt, spec.bits_per_symbol, ebn0)
    cfg = spec.detectors[0]
    if cfg.variant not in ("idls", "idls-noise"):
        cfg = det.DetectorConfig(variant="idls", alpha=cfg.alpha, eps=cfg.eps,
                                 k_max=cfg.k_max)
    imp = ImpairmentParams()
    ser_idls = ser_ml = 0
    for t in range(trials):
        rng = trial_rng(spec.master_seed, 0, 0, t)
        real = draw_channel(spec.channel, imp, rng)
        s_tx, _ = random_symbols(spec.channel.nt, con, rng)
        y = receive(real.h_true, transmit(s_tx, imp, rng), sigma2, rng)
        y_r, h_r = stack_real(y, real.h_est)
        model = RealLinearModel(y=y_r, h=h_r, sigma2=sigma2)
        res = det.idls(model, con, cfg) if cfg.variant == "idls" else \
            det.idls_noise_aware(model, con, cfg, sigma2)
        from .constellation import slice_real
        sym_hat, _ = slice_real(res.s_hat_real, con)
        ser_idls += int(np.count_nonzero(np.abs(sym_hat - s_tx) > 1e-9))
        sym_ml, _, _ = ml_detect(y, real.h_est, con)
        ser_ml += int(np.count_nonzero(np.abs(sym_ml - s_tx) > 1e-9))
    total = trials * spec.channel.nt
    print("detector,ebn0_db,symbol_errors,total_symbols,ser")
    print(f"idls,{ebn0:.10g},{ser_idls},{total},{ser_idls / total:.10g}")
    print(f"ml,{ebn0:.10g},{ser_ml},{total},{ser_ml / total:.10g}")
    return EXIT_OK


def _validate_suite(seed: int = 0) -> list[tuple[str, bool]]:
    """Fast structural checks: variant reductions, update identities,
    surrogate majorization, and the KKT residual of the tuned weight."""
    rng = np.random.default_rng(seed)
    con = make_qam(2)
    results = []

    model = RealLinearModel(y=rng.standard_normal(16),
                            h=rng.standard_normal((16, 12)), sigma2=0.1)
    wls_n0 = regparam.weighted_noise(model, 0.0)
    wls_p = regparam.weighted_plain(model)
    results.append(("noise-aware(sigma2=0) == plain",
                    np.allclose(wls_n0.m_mat, wls_p.m_mat, atol=1e-12)
                    and np.allclose(wls_n0.g_vec, wls_p.g_vec, atol=1e-12)))

    imp0 = ImpairmentParams()
    yc = (rng.standard_normal(8) + 1j * rng.standard_normal(8))
    hc = (rng.standard_normal((8, 6)) + 1j * rng.standard_normal((8, 6))) / np.sqrt(2)
    y_r, h_r = stack_real(yc, hc)
    m2 = RealLinearModel(y=y_r, h=h_r, sigma2=0.1)
    wls_r = regparam.weighted_robust(yc, hc, imp0, 0.1)
    wls_n = regparam.weighted_noise(m2, 0.1)
    results.append(("robust(tau=0,eta=0) == noise-aware",
                    np.allclose(wls_r.m_mat, wls_n.m_mat, atol=1e-10)
                    and np.allclose(wls_r.g_vec, wls_n.g_vec, atol=1e-10)))

    results.append(("lmmse left/right forms agree",
                    np.allclose(det.lmmse(m2, 0.1), det.lmmse_right(m2, 0.1),
                                atol=1e-10)))

    x = rng.standard_normal(200) * 2
    piv = rng.standard_normal(200) * 2
    maj = np.all(surrogate_value(x, piv, 0.1) >= l0_smooth(x, 0.1) - 1e-12)
    tight = np.allclose(surrogate_value(piv, piv, 0.1), l0_smooth(piv, 0.1),
                        atol=1e-12)
    results.append(("surrogate majorizes and is tight at the pivot", maj and tight))

    # consistent observation: the search ball around the data term is reachable
    s_true = (rng.integers(0, 2, 6) * 2 - 1 + 1j * (rng.integers(0, 2, 6) * 2 - 1)) / np.sqrt(2)
    y3 = hc @ s_true + np.sqrt(0.05) * (rng.standard_normal(8) + 1j * rng.standard_normal(8))
    y3_r, h3_r = stack_real(y3, hc)
    wls_k = regparam.weighted_noise(RealLinearModel(y=y3_r, h=h3_r, sigma2=0.1), 0.1)
    qt = update_pivots(rng.standard_normal(12), con, 0.1)
    pencil = regparam.assemble_pencil(wls_k, qt, "idls-noise")
    try:
        sol = regparam.max_finite_real_geneig(pencil)
        ok = sol.kkt_residual <= 1e-6 * max(wls_k.y_quad, 1.0)
    except regparam.NoAdmissibleLambda:
        ok = False
    results.append(("tuned lambda satisfies the search-ball KKT condition", ok))
    return results


def cmd_validate(args) -> int:
    results = _validate_suite(args.seed)
    for name, ok in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return EXIT_OK if all(ok for _, ok in results) else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="idlsim",
                                     description="Overloaded MIMO symbol-detection simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("sweep", cmd_sweep), ("convergence", cmd_convergence),
                     ("lambda-trace", cmd_lambda_trace),
                     ("oracle-compare", cmd_oracle_compare),
                     ("validate", cmd_validate)):
        p = sub.add_parser(name)
        _add_common_flags(p)
        p.set_defaults(func=fn)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(argv)
        args = build_parser().parse_args(argv)
    except (ValueError, OSError, IndexError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as err:  # runtime failure, not a usage problem
        print(f"runtime error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
