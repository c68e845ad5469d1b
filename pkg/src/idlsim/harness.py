"""Monte-Carlo engine: end-to-end trials, Eb/N0 sweeps, BER counting, CSV output."""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import detectors as det
from .channel import (ChannelSpec, ImpairmentParams, correlation_for, draw_channel,
                      effective_noise_covariance, normalize_received, receive,
                      transmit, trial_rng)
from .constellation import (Constellation, RealLinearModel, make_qam, random_symbols,
                            slice_real, stack_real)
from .l1_baseline import LAMBDA_GRID, L1Config, soav_detect

SWEEP_HEADER = ["detector", "channel", "nt", "nr", "ebn0_db", "trials",
                "bit_errors", "total_bits", "ber", "avg_iterations",
                "converged_fraction"]
CONVERGENCE_HEADER = ["detector", "ebn0_db", "iteration", "ber"]
LAMBDA_HEADER = ["trial", "iteration", "lambda"]

_BATCH = 256          # fixed stopping-check granularity, scheduler-invariant
_PILOT_KEY = 1        # rng namespace for baseline lambda selection
_MAIN_KEY = 0

IDLS_VARIANTS = ("idls", "idls-noise", "idls-robust")


@dataclass(frozen=True)
class ExperimentSpec:
    channel: ChannelSpec
    impairments: ImpairmentParams
    detectors: tuple[det.DetectorConfig, ...]
    ebn0_grid_db: tuple[float, ...]
    trials: int | None = None
    target_bit_errors: int | None = 200
    max_bits: int = 1_000_000
    master_seed: int = 0
    bits_per_symbol: int = 2
    workers: int = 1
    soav_pilot_trials: int = 32

    def __post_init__(self):
        if len(self.ebn0_grid_db) == 0:
            raise ValueError("ebn0 grid must be non-empty")
        if self.trials is not None and self.trials < 1:
            raise ValueError("trials must be >= 1")

    def bits_per_trial(self) -> int:
        return self.channel.nt * self.bits_per_symbol

    def trial_budget(self) -> int:
        if self.trials is not None:
            return self.trials
        return -(-self.max_bits // self.bits_per_trial())


@dataclass
class TrialRecord:
    detector: str
    ebn0_db: float
    bit_errors: int
    total_bits: int
    iterations: int
    converged: bool
    failed: bool = False
    symbol_errors: int = 0
    lambda_trace: list[float] | None = None
    iter_bit_errors: np.ndarray | None = None  # per-iteration counts (convergence runs)


def detector_id(cfg: det.DetectorConfig) -> str:
    return getattr(cfg, "name", None) or cfg.variant


def noise_variance(nt: int, b: int, ebn0_db: float) -> float:
    """sigma2 = Nt / (b * 10^(EbN0[dB]/10)), complex-domain convention."""
    if b <= 0:
        raise ValueError("b must be > 0")
    return nt / (b * 10.0 ** (ebn0_db / 10.0))


def resolved_impairments(spec: ExperimentSpec) -> ImpairmentParams:
    """Fill correlation signatures from the channel model when not given."""
    imp = spec.impairments
    phi_r, phi_t = correlation_for(spec.channel)
    return ImpairmentParams(
        tau=imp.tau, eta=imp.eta,
        phi_r=imp.phi_r if imp.phi_r is not None else phi_r,
        phi_t=imp.phi_t if imp.phi_t is not None else phi_t,
    )


def _detect_one(cfg: det.DetectorConfig, y, real, model: RealLinearModel,
                con: Constellation, imp: ImpairmentParams, sigma2: float,
                soav_lambda: float | None):
    """Returns (s_hat_real, iterations, converged, result_or_none)."""
    variant = cfg.variant
    if variant == "zf":
        return det.zf_or_ridge(model), 1, True, None
    if variant == "lmmse":
        if imp.tau > 0 or imp.eta > 0:
            y_bar = normalize_received(y, imp.tau)
            sc, su = effective_noise_covariance(real.h_est, imp, sigma2)
            return det.lmmse_sigma_aware(y_bar, real.h_est, sc + su), 1, True, None
        return det.lmmse(model, sigma2), 1, True, None
    if variant == "soav":
        lam = soav_lambda if soav_lambda is not None else 0.1
        s_hat = soav_detect(model, con, L1Config(lam=lam))
        return s_hat, 1, True, None
    if variant == "idls":
        res = det.idls(model, con, cfg)
    elif variant == "idls-noise":
        res = det.idls_noise_aware(model, con, cfg, sigma2)
    elif variant == "idls-robust":
        y_bar = normalize_received(y, imp.tau)
        res = det.idls_robust(y_bar, real.h_est, con, cfg, imp, sigma2)
    else:
        raise ValueError(f"unknown detector variant {variant!r}")
    s_out = res.s_lattice_real if res.s_lattice_real is not None else res.s_hat_real
    return s_out, res.iterations, res.converged, res


def _run_trial(spec: ExperimentSpec, imp: ImpairmentParams, con: Constellation,
               point_idx: int, ebn0_db: float, sigma2: float, trial_idx: int,
               soav_lambdas: dict[str, float], namespace: int = _MAIN_KEY,
               collect_traces: bool = False) -> list[TrialRecord]:
    rng = trial_rng(spec.master_seed, point_idx, namespace, trial_idx)
    real = draw_channel(spec.channel, imp, rng)
    s_tx, bits_tx = random_symbols(spec.channel.nt, con, rng)
    x = transmit(s_tx, imp, rng)
    y = receive(real.h_true, x, sigma2, rng)
    y_r, h_r = stack_real(y, real.h_est)
    model = RealLinearModel(y=y_r, h=h_r, sigma2=sigma2)

    records = []
    for cfg in spec.detectors:
        name = detector_id(cfg)
        try:
            s_hat, iters, conv, res = _detect_one(
                cfg, y, real, model, con, imp, sigma2, soav_lambdas.get(name))
        except (det.NonFiniteIterate, np.linalg.LinAlgError) as _:
            records.append(TrialRecord(name, ebn0_db, 0, 0, 0, False, failed=True))
            continue
        sym_hat, bits_hat = slice_real(s_hat, con)
        bit_errors = int(np.count_nonzero(bits_hat != bits_tx))
        sym_errors = int(np.count_nonzero(np.abs(sym_hat - s_tx) > 1e-9))
        rec = TrialRecord(name, ebn0_db, bit_errors, len(bits_tx), iters, conv,
                          symbol_errors=sym_errors)
        if collect_traces and res is not None:
            rec.lambda_trace = list(res.lambda_trace)
            if res.iterate_history:
                per_iter = np.empty(len(res.iterate_history), dtype=np.int64)
                for k, s_k in enumerate(res.iterate_history):
                    _, b_k = slice_real(s_k, con)
                    per_iter[k] = np.count_nonzero(b_k != bits_tx)
                rec.iter_bit_errors = per_iter
        records.append(rec)
    return records


def _trial_star(args):
    return _run_trial(*args)


def _map_trials(spec: ExperimentSpec, arg_lists, workers: int):
    if workers <= 1:
        for args in arg_lists:
            yield _trial_star(args)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_trial_star, arg_lists, chunksize=8)


def select_soav_lambda(spec: ExperimentSpec, imp: ImpairmentParams, con: Constellation,
                       point_idx: int, ebn0_db: float, sigma2: float) -> float:
    """Coarse grid selection of the baseline penalty by pilot BER (paired trials)."""
    probe = replace(spec, detectors=(det.DetectorConfig(variant="soav"),))
    best_lam, best_err = LAMBDA_GRID[0], None
    for lam in LAMBDA_GRID:
        errs = 0
        for t in range(spec.soav_pilot_trials):
            recs = _run_trial(probe, imp, con, point_idx, ebn0_db, sigma2, t,
                              {"soav": lam}, namespace=_PILOT_KEY)
            errs += recs[0].bit_errors
        if best_err is None or errs < best_err:
            best_err, best_lam = errs, lam
    return best_lam


def run_point(spec: ExperimentSpec, point_idx: int, ebn0_db: float,
              collect_traces: bool = False):
    """All trials for one Eb/N0 point; returns (records, soav_lambdas)."""
    con = make_qam(spec.bits_per_symbol)
    imp = resolved_impairments(spec)
    sigma2 = noise_variance(spec.channel.nt, spec.bits_per_symbol, ebn0_db)
    soav_lambdas = {}
    for cfg in spec.detectors:
        if cfg.variant == "soav":
            lam = getattr(cfg, "soav_lambda", None)
            if lam is None:
                lam = select_soav_lambda(spec, imp, con, point_idx, ebn0_db, sigma2)
            soav_lambdas[detector_id(cfg)] = lam

    budget = spec.trial_budget()
    names = [detector_id(c) for c in spec.detectors]
    errors = {n: 0 for n in names}
    records: list[TrialRecord] = []
    done = 0
    while done < budget:
        batch = min(_BATCH, budget - done)
        args = [(spec, imp, con, point_idx, ebn0_db, sigma2, done + i,
                 soav_lambdas, _MAIN_KEY, collect_traces) for i in range(batch)]
        for recs in _map_trials(spec, args, spec.workers):
            records.extend(recs)
            for r in recs:
                errors[r.detector] += r.bit_errors
        done += batch
        if spec.target_bit_errors is not None and \
                all(e >= spec.target_bit_errors for e in errors.values()):
            break
    return records, soav_lambdas


def aggregate_sweep(spec: ExperimentSpec, ebn0_db: float,
                    records: list[TrialRecord]) -> list[dict]:
    rows = []
    for cfg in spec.detectors:
        name = detector_id(cfg)
        recs = [r for r in records if r.detector == name and not r.failed]
        bits = sum(r.total_bits for r in recs)
        errs = sum(r.bit_errors for r in recs)
        iters = np.mean([r.iterations for r in recs]) if recs else 0.0
        conv = np.mean([1.0 if r.converged else 0.0 for r in recs]) if recs else 0.0
        rows.append({
            "detector": name,
            "channel": spec.channel.model,
            "nt": spec.channel.nt,
            "nr": spec.channel.nr,
            "ebn0_db": ebn0_db,
            "trials": len(recs),
            "bit_errors": errs,
            "total_bits": bits,
            "ber": errs / bits if bits else 0.0,
            "avg_iterations": float(iters),
            "converged_fraction": float(conv),
        })
    return rows


def run_sweep(spec: ExperimentSpec):
    """Sweep all Eb/N0 points; returns (records, table rows, soav lambda log)."""
    all_records, all_rows, soav_log = [], [], {}
    for p, ebn0 in enumerate(spec.ebn0_grid_db):
        records, lams = run_point(spec, p, ebn0)
        all_records.extend(records)
        all_rows.extend(aggregate_sweep(spec, ebn0, records))
        if lams:
            soav_log[ebn0] = lams
    return all_records, all_rows, soav_log


def run_convergence(spec: ExperimentSpec, ebn0_db: float) -> list[dict]:
    """Per-iteration BER table for iterate-recording detectors."""
    traced = tuple(replace(c, record_iterates=True) if c.variant in IDLS_VARIANTS else c
                   for c in spec.detectors)
    spec = replace(spec, detectors=traced)
    records, _ = run_point(spec, 0, ebn0_db, collect_traces=True)
    rows = []
    for cfg in spec.detectors:
        if cfg.variant not in IDLS_VARIANTS:
            continue
        name = detector_id(cfg)
        recs = [r for r in records if r.detector == name and not r.failed]
        k_max = cfg.k_max
        err_k = np.zeros(k_max, dtype=np.int64)
        bits = sum(r.total_bits for r in recs)
        for r in recs:
            per = r.iter_bit_errors
            # iterate frozen after convergence: pad with the final count
            padded = np.concatenate([per, np.full(k_max - len(per), per[-1])])
            err_k += padded
        for k in range(k_max):
            rows.append({"detector": name, "ebn0_db": ebn0_db,
                         "iteration": k + 1, "ber": err_k[k] / bits if bits else 0.0})
    return rows


def run_lambda_trace(spec: ExperimentSpec, ebn0_db: float) -> list[dict]:
    """Per-trial lambda trace rows for the first IDLS-variant detector."""
    records, _ = run_point(spec, 0, ebn0_db, collect_traces=True)
    rows = []
    trial = 0
    for r in records:
        if r.lambda_trace is None or r.failed:
            continue
        for k, lam in enumerate(r.lambda_trace):
            rows.append({"trial": trial, "iteration": k + 1, "lambda": lam})
        trial += 1
    return rows


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def write_csv(rows: list[dict], header: list[str], path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row[h]) for h in header])
