"""Signal and noise ensembles plus the scaled-down recovery experiments.

Every trial draws its matrix, signal and noise from independent streams
spawned from ``SeedSequence([seed, point, trial])``, so results do not
depend on execution order or on how many worker processes are used.
"""

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from nnlad.expander import generate_bernoulli, generate_dlrbg
from nnlad.io import format_csv
from nnlad.linalg import SparseWalkMatrix, operator_norm_2
from nnlad.solvers import (SOLVERS, SolverParams, eiht_solve, nnlad_solve, nnls_solve,
                           subgradient_solve)

TRIAL_HEADER = ("decoder", "s", "snr", "trial", "rel_l1", "rel_l2", "log_l1",
                "residual_l1", "time_ms", "iters")
SUMMARY_HEADER = ("decoder", "s", "snr", "trials", "mean_rel_l1", "mean_log_l1",
                  "mean_err_noise_ratio", "certified")
TRACE_HEADER = ("decoder", "trial", "iter", "rel_l1", "rel_residual", "time_ms")

DESK_DIMS = (256, 64, 8)
FULL_SCALE_DIMS = (1024, 256, 10)


@dataclass(frozen=True)
class SignalSpec:
    N: int
    S: int
    sphere: str = "l1"
    nonneg: bool = True

    def __post_init__(self):
        if not 1 <= self.S <= self.N:
            raise ValueError("need 1 <= S <= N")
        if self.sphere not in ("l1", "l2"):
            raise ValueError("sphere must be 'l1' or 'l2'")


@dataclass(frozen=True)
class NoiseSpec:
    M: int
    r: int
    scale: float

    def __post_init__(self):
        if self.r not in (0, 1, 2):
            raise ValueError("r must be 0, 1 or 2")
        if not (math.isfinite(self.scale) and self.scale >= 0):
            raise ValueError("noise scale must be finite and >= 0")


def gen_signal(spec, seed=None):
    """Nonnegative S-sparse vector on the unit l1 or l2 sphere.

    The support is uniform over all S-subsets. On the l1 sphere the
    magnitudes are normalized i.i.d. exponentials (uniform on the simplex);
    on the l2 sphere they are absolute Gaussians normalized in l2.
    """
    rng = np.random.default_rng(seed)
    x = np.zeros(spec.N)
    support = np.sort(rng.choice(spec.N, size=spec.S, replace=False))
    if spec.sphere == "l1":
        mags = rng.exponential(size=spec.S)
        # exponential draws are a.s. positive; guard the measure-zero case
        mags = np.where(mags > 0, mags, np.finfo(float).tiny)
        x[support] = mags / mags.sum()
    else:
        mags = np.abs(rng.standard_normal(spec.S))
        mags = np.where(mags > 0, mags, np.finfo(float).tiny)
        x[support] = mags / np.linalg.norm(mags)
    return x


def gen_noise(spec, seed=None):
    """Noise uniformly distributed on ``scale`` times an l_r unit sphere.

    r = 0: a single signed spike of height ``scale``. r = 1: normalized
    i.i.d. Laplace variates (uniform on the l1 sphere). r = 2: normalized
    i.i.d. Gaussians.
    """
    rng = np.random.default_rng(seed)
    e = np.zeros(spec.M)
    if spec.scale == 0:
        return e
    if spec.r == 0:
        m = rng.integers(spec.M)
        e[m] = spec.scale if rng.random() < 0.5 else -spec.scale
        return e
    if spec.r == 1:
        g = rng.laplace(size=spec.M)
        return spec.scale * g / np.abs(g).sum()
    g = rng.standard_normal(spec.M)
    return spec.scale * g / np.linalg.norm(g)


@dataclass
class TrialRecord:
    seed: int
    point: int
    trial: int
    n: int
    m: int
    d: int
    s: int
    snr: float
    r: int
    decoder: str
    rel_l1: float
    rel_l2: float
    log_l1: float
    residual_l1: float
    time_ms: float
    iters: int
    status: str
    noise_l1: float
    abs_err_l1: float


@dataclass
class ExperimentConfig:
    """Experiment description, loadable from the JSON config file.

    ``snr`` may be a number, ``"inf"`` or a list (a sweep). With
    ``timing`` false the ``time_ms`` column is left empty so reruns produce
    byte-identical CSV.
    """

    n: int = DESK_DIMS[0]
    m: int = DESK_DIMS[1]
    d: int = DESK_DIMS[2]
    snr: object = 1000.0
    r: int = 1
    s_values: list = field(default_factory=lambda: [5])
    trials: int = 10
    decoders: list = field(default_factory=lambda: list(SOLVERS))
    seed: int = 0
    output_path: str | None = None
    experiment: int = 1
    max_iters: int = 20_000
    timing: bool = False
    full_scale: bool = False

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def validate(self):
        bad = [d for d in self.decoders if d not in SOLVERS]
        if bad:
            raise ValueError(f"unknown decoders {bad}; choose from {SOLVERS}")
        if self.trials < 1 or not self.s_values:
            raise ValueError("need trials >= 1 and a nonempty s_values")
        if self.experiment not in (1, 2):
            raise ValueError("experiment must be 1 or 2")
        if not 1 <= self.d <= self.m:
            raise ValueError("need 1 <= d <= m")

    def dims(self):
        return FULL_SCALE_DIMS if self.full_scale else (self.n, self.m, self.d)

    def snr_values(self):
        vals = self.snr if isinstance(self.snr, (list, tuple)) else [self.snr]
        return [float(v) for v in vals]

    def points(self):
        return [(s, snr) for s in self.s_values for snr in self.snr_values()]


def trial_streams(seed, point, trial, n=3):
    ss = np.random.SeedSequence([int(seed), int(point), int(trial)])
    return [np.random.default_rng(c) for c in ss.spawn(n)]


def run_decoder(name, A, y, S_prime, max_iters, op_norm):
    params = SolverParams(max_iters=max_iters)
    if name == "nnlad":
        return nnlad_solve(A, y, params, op_norm=op_norm)
    if name == "nnls":
        return nnls_solve(A, y, params, op_norm=op_norm)
    if name == "subgrad":
        return subgradient_solve(A, y, params)
    if name == "eiht":
        return eiht_solve(A, y, S_prime, params)
    raise ValueError(f"unknown decoder {name!r}")


def _experiment1_trial(cfg, point, s, snr, trial):
    n, m, d = cfg.dims()
    rng_a, rng_x, rng_e = trial_streams(cfg.seed, point, trial)
    A = generate_dlrbg(n, m, d, seed=rng_a)
    x = gen_signal(SignalSpec(n, s, "l1"), rng_x)
    Ax = A.matvec(x)
    ax1 = float(np.abs(Ax).sum())
    if abs(ax1 - np.abs(x).sum()) > 1e-12 * max(1.0, ax1):
        raise RuntimeError("walk matrix failed to preserve the l1 norm of a nonnegative signal")
    scale = 0.0 if math.isinf(snr) else ax1 / snr
    e = gen_noise(NoiseSpec(m, cfg.r, scale), rng_e)
    e1 = float(np.abs(e).sum())
    if scale > 0 and abs(ax1 / e1 - snr) > 1e-9 * snr:
        raise RuntimeError(f"SNR bookkeeping off: {ax1 / e1} vs {snr}")
    y = Ax + e
    op_norm = operator_norm_2(A)
    x1, x2 = float(np.abs(x).sum()), float(np.linalg.norm(x))
    out = []
    for name in cfg.decoders:
        t0 = time.perf_counter()
        try:
            res = run_decoder(name, A, y, int(np.count_nonzero(x)), cfg.max_iters, op_norm)
        except (ValueError, FloatingPointError) as exc:
            out.append(TrialRecord(cfg.seed, point, trial, n, m, d, s, snr, cfg.r, name,
                                   math.nan, math.nan, math.nan, math.nan, math.nan, 0,
                                   f"error: {exc}", e1, math.nan))
            continue
        ms = 1000.0 * (time.perf_counter() - t0)
        err = res.estimate - x
        err1 = float(np.abs(err).sum())
        rel1 = err1 / x1
        out.append(TrialRecord(
            seed=cfg.seed, point=point, trial=trial, n=n, m=m, d=d, s=s, snr=snr, r=cfg.r,
            decoder=name, rel_l1=rel1, rel_l2=float(np.linalg.norm(err)) / x2,
            log_l1=10 * math.log10(rel1) if rel1 > 0 else -math.inf,
            residual_l1=float(np.abs(A.matvec(res.estimate) - y).sum()),
            time_ms=ms, iters=res.iterations, status=res.status, noise_l1=e1, abs_err_l1=err1))
    return out


def _run_tasks(fn, tasks, jobs):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, *zip(*tasks)))
    return [fn(*t) for t in tasks]


def run_experiment1(cfg, jobs=1):
    """Recovery errors over the (sparsity, SNR) grid for each decoder.

    Returns TrialRecords ordered by (sweep point, trial, decoder).
    """
    if isinstance(cfg, dict):
        cfg = ExperimentConfig.from_dict(cfg)
    tasks = [(cfg, i, s, snr, t) for i, (s, snr) in enumerate(cfg.points())
             for t in range(cfg.trials)]
    records = []
    for chunk in _run_tasks(_experiment1_trial, tasks, jobs):
        records.extend(chunk)
    return records


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records, timing=False):
    rows = [(r.decoder, r.s, _fmt(r.snr), r.trial, _fmt(r.rel_l1), _fmt(r.rel_l2),
             _fmt(r.log_l1), _fmt(r.residual_l1), _fmt(r.time_ms) if timing else "", r.iters)
            for r in records]
    return format_csv(TRIAL_HEADER, rows)


def aggregate_metrics(records):
    """Per (decoder, s, snr) means of the relative l1 error, its 10*log10,
    and the error-to-noise ratio ||x - x#||_1 / ||e||_1.

    Returns a list of dict rows in first-appearance order.
    """
    if not records:
        raise ValueError("aggregate_metrics needs at least one record")
    groups = {}
    for r in records:
        groups.setdefault((r.decoder, r.s, r.snr), []).append(r)
    rows = []
    for (dec, s, snr), rs in groups.items():
        ratios = [r.abs_err_l1 / r.noise_l1 if r.noise_l1 > 0 else math.nan for r in rs]
        rows.append({
            "decoder": dec, "s": s, "snr": snr, "trials": len(rs),
            "mean_rel_l1": float(np.mean([r.rel_l1 for r in rs])),
            "mean_log_l1": float(np.mean([r.log_l1 for r in rs])),
            "mean_err_noise_ratio": float(np.mean(ratios)),
            "certified": sum(r.status == "certified" for r in rs),
        })
    return rows


def summary_to_csv(rows):
    return format_csv(SUMMARY_HEADER, [tuple(_fmt(row[k]) for k in SUMMARY_HEADER) for row in rows])


def log_trace_points(max_iters, per_decade=10):
    """Roughly log-spaced iteration numbers from 1 to ``max_iters``."""
    pts = np.unique(np.round(np.logspace(0, math.log10(max_iters),
                                         int(per_decade * math.log10(max_iters)) + 1)))
    return tuple(int(p) for p in pts if 1 <= p <= max_iters)


@dataclass
class TraceRow:
    decoder: str
    trial: int
    iter: int
    rel_l1: float
    rel_residual: float
    time_ms: float


def _experiment2_trial(cfg, s, trial):
    n, m, d = cfg.dims()
    rng_a, rng_x, _ = trial_streams(cfg.seed, 0, trial)
    if cfg.r == 2:
        A = generate_bernoulli(n, m, seed=rng_a)
        sphere = "l2"
    else:
        A = generate_dlrbg(n, m, d, seed=rng_a)
        sphere = "l1"
    x = gen_signal(SignalSpec(n, s, sphere), rng_x)
    y = A.matvec(x)
    x1, y1 = float(np.abs(x).sum()), float(np.abs(y).sum())
    op_norm = operator_norm_2(A)
    points = log_trace_points(cfg.max_iters)
    params = SolverParams(max_iters=cfg.max_iters, trace_iters=points, keep_iterates=True,
                          certify=False)
    rows = []

    def emit(label, samples, snap="iterate"):
        for smp in samples:
            xk = smp.iterate if snap == "iterate" else smp.avg_iterate
            if xk is None:
                continue
            rows.append(TraceRow(label, trial, smp.iter, float(np.abs(xk - x).sum()) / x1,
                                 float(np.abs(A.matvec(xk) - y).sum()) / y1, 1000.0 * smp.elapsed))

    for name in cfg.decoders:
        if name == "eiht" and not isinstance(A, SparseWalkMatrix):
            continue
        if name == "nnlad":
            p = SolverParams(**{**asdict(params), "track_averages": True})
            res = nnlad_solve(A, y, p, op_norm=op_norm)
            emit("nnlad", res.trace)
            emit("nnlad_avg", [smp for smp in res.trace if smp.iter > 0], snap="avg")
        elif name == "nnls":
            emit("nnls", nnls_solve(A, y, params, op_norm=op_norm).trace)
        elif name == "subgrad":
            emit("subgrad", subgradient_solve(A, y, params).trace)
        else:
            emit("eiht", eiht_solve(A, y, int(np.count_nonzero(x)), params).trace)
    return rows


def run_experiment2(cfg, jobs=1):
    """Noiseless convergence traces from zero initialization.

    ``cfg.r`` selects the matrix arm: 1 for a D-LRBG with l1-normalized
    signals, 2 for a 0/1 Bernoulli matrix with l2-normalized signals (EIHT
    is skipped there since it needs neighbor lists). Uses the first entry
    of ``s_values``.
    """
    if isinstance(cfg, dict):
        cfg = ExperimentConfig.from_dict(cfg)
    s = cfg.s_values[0]
    rows = []
    for chunk in _run_tasks(_experiment2_trial, [(cfg, s, t) for t in range(cfg.trials)], jobs):
        rows.extend(chunk)
    return rows


def trace_rows_to_csv(rows, timing=False):
    return format_csv(TRACE_HEADER, [(r.decoder, r.trial, r.iter, _fmt(r.rel_l1),
                                      _fmt(r.rel_residual), _fmt(r.time_ms) if timing else "")
                                     for r in rows])
