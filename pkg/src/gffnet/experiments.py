"""Experiment harness behind the CLI: configs, seeded trials, CSV records.

Every trial draws from a seed derived by hashing (master_seed, labels...),
and rows are emitted in a fixed order, so output bytes do not depend on the
number of worker threads.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .baseline import (
    BaselineConfig,
    bmt_condition,
    canonical_U,
    estimate_sigma_bmt,
    improvised_U,
    invert_baseline,
    tau_bound,
)
from .errors import DegenerateCharFn, GFFError, IllConditionedPlugin, ParameterError
from .estimator import (
    ProbeTable,
    SymmetricMatrixEstimate,
    assemble_Leta,
    estimate_precision,
    oracle_probe_table,
    phi_n,
    recover_support,
    sample_probe_table,
)
from .gff import GFFModel, SampleSet, covariance, exact_Leta, exact_phi, sample_field
from .graph import FAMILIES, WeightedGraph, connectivity_threshold, sample_erdos_renyi
from .io import read_edgelist, write_edgelist
from .metrics import (
    binomial_se,
    bound_inverse_error,
    bound_phi_tail,
    bound_sigma_error,
    error_report,
    fit_rate_slope,
)

log = logging.getLogger(__name__)

ESTIMATORS = ("fourier", "bmt_canonical", "bmt_improvised")
GRAPH_KINDS = ("er", "file") + tuple(FAMILIES)
DEFAULT_MU = 0.1
DEFAULT_ETA = 1.0
RECOVERY_TARGET = 0.9


@dataclass(frozen=True)
class ExperimentConfig:
    graph: str = "cycle"
    d: int | None = None
    p: float | None = None
    graph_file: str | None = None
    mu: float = DEFAULT_MU
    eta: float | str | None = None
    n_grid: tuple[int, ...] = (1000,)
    trials: int = 1
    estimators: tuple[str, ...] = ("fourier",)
    master_seed: int = 0
    timing: bool = False
    # baseline
    R: float | None = None
    gamma: float = 2.0
    c0: float = 0.25
    # concentration
    t: tuple[float, ...] | None = None
    x_grid: tuple[float, ...] = (0.05, 0.1, 0.2)
    reps: int = 1000
    n: int | None = None
    # recovery
    tau: float = 0.5
    oracle: bool = False

    def __post_init__(self):
        if self.graph not in GRAPH_KINDS:
            raise ParameterError(f"graph must be one of {GRAPH_KINDS}, got {self.graph!r}")
        if self.graph == "file":
            if not self.graph_file:
                raise ParameterError("graph='file' needs graph_file")
        elif self.d is None:
            raise ParameterError(f"graph={self.graph!r} needs d")
        if self.graph == "er" and self.p is None:
            raise ParameterError("graph='er' needs p")
        for key in ("n_grid", "estimators", "x_grid") + (("t",) if self.t is not None else ()):
            object.__setattr__(self, key, tuple(getattr(self, key)))
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ParameterError(f"n_grid must be nonempty and strictly increasing, got {self.n_grid}")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        bad = set(self.estimators) - set(ESTIMATORS)
        if bad or not self.estimators:
            raise ParameterError(f"unknown estimators {sorted(bad)}; choose from {ESTIMATORS}")
        if self.eta == "theta_p" and self.graph != "er":
            raise ParameterError("eta='theta_p' requires an Erdos-Renyi graph")
        if isinstance(self.eta, str) and self.eta != "theta_p":
            raise ParameterError(f"eta must be a number or 'theta_p', got {self.eta!r}")
        if not self.mu > 0:
            raise ParameterError("mu must be positive")

    @property
    def resolved_eta(self) -> float:
        if self.eta == "theta_p" or (self.eta is None and self.graph == "er"):
            return float(self.p)
        return DEFAULT_ETA if self.eta is None else float(self.eta)

    def hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def config_from_dict(raw: dict[str, Any]) -> ExperimentConfig:
    """Flatten ``[graph]``, ``[model]``, ``[run]``... sections into one config."""
    flat: dict[str, Any] = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    if "kind" in flat:
        flat["graph"] = flat.pop("kind")
    if "file" in flat:
        flat["graph_file"] = flat.pop("file")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(flat) - known
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**flat)


def load_config(path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        cfg = config_from_dict(tomllib.load(fh))
    if cfg.graph_file and not Path(cfg.graph_file).is_absolute():
        cfg = replace(cfg, graph_file=str(Path(path).parent / cfg.graph_file))
    return cfg


def derive_seed(master: int, *labels) -> int:
    """64-bit seed from a hash of the master seed and cell labels."""
    key = "|".join(str(x) for x in (master, *labels)).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")


def build_graph(cfg: ExperimentConfig, *labels) -> WeightedGraph:
    if cfg.graph == "file":
        return read_edgelist(cfg.graph_file)
    if cfg.graph == "er":
        return sample_erdos_renyi(cfg.d, cfg.p, derive_seed(cfg.master_seed, "graph", *labels))
    return FAMILIES[cfg.graph](cfg.d)


def _pmap(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- CSV output

SWEEP_COLUMNS = (
    "estimator", "graph", "d", "p", "mu", "eta", "U", "n", "trial", "seed", "status", "reason",
    "frob_scaled", "frob", "op_norm", "entry_max", "support_exact",
    "stage1_frob_scaled", "stage1_op_norm", "stage1_entry_max",
    "phi_dev_max", "bound_phi", "bound_sigma", "bound_sigma_applicable",
    "tau_U", "tau_applicable", "bmt_condition", "n_ok", "slope_stage1", "slope_precision", "wall_ms",
)

CONCENTRATION_COLUMNS = (
    "graph", "d", "mu", "eta", "t", "n", "reps", "x", "exceed", "freq", "se",
    "bound", "bound_simplified", "within_bound",
)

RECOVERY_COLUMNS = (
    "graph", "d", "p", "mu", "eta", "tau", "n", "trial", "seed", "status", "reason",
    "n_edges", "success", "entry_max", "success_fraction", "n_trials", "n_min",
)


def format_cell(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "NA" if np.isnan(v) else repr(float(v))
    return str(v)


def render_csv(rows: Iterable[dict], columns: Sequence[str], config_hash: str) -> str:
    out = [f"# config-hash={config_hash}", ",".join(columns)]
    for row in rows:
        extra = set(row) - set(columns)
        if extra:
            raise KeyError(f"row has unknown columns {sorted(extra)}")
        out.append(",".join(format_cell(row.get(c)) for c in columns))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- trials

@dataclass
class Setting:
    """Everything fixed across the trials of one experiment."""

    cfg: ExperimentConfig
    graph: WeightedGraph
    model: GFFModel
    eta: float
    Leta: np.ndarray = field(init=False)
    sigma: np.ndarray = field(init=False)
    oracle_table: ProbeTable = field(init=False)

    def __post_init__(self):
        self.Leta = exact_Leta(self.model, self.eta)
        self.sigma = covariance(self.model)
        self.oracle_table = oracle_probe_table(self.model, self.eta)

    @classmethod
    def from_config(cls, cfg: ExperimentConfig, *labels) -> "Setting":
        g = build_graph(cfg, *labels)
        return cls(cfg, g, GFFModel.from_graph(g, cfg.mu), cfg.resolved_eta)

    @property
    def edges(self):
        return self.graph.edge_set() if self.graph.is_unit_weight() else None

    def base_row(self, estimator: str, n: int) -> dict:
        cfg = self.cfg
        return dict(estimator=estimator, graph=cfg.graph, d=self.graph.d, p=cfg.p, mu=cfg.mu, eta=self.eta, n=n)

    def baseline_config(self) -> BaselineConfig:
        R = self.cfg.R if self.cfg.R is not None else 1.0 / self.model.mu
        return BaselineConfig(R=R, gamma=self.cfg.gamma, c0=self.cfg.c0)


def _phi_deviation(table: ProbeTable, oracle: ProbeTable) -> float:
    iu = np.triu_indices(table.d, k=1)
    dev = [abs(table.zero - oracle.zero)]
    dev += list(np.abs(table.axes - oracle.axes))
    dev += list(np.abs(table.pairs[iu] - oracle.pairs[iu]))
    return float(max(dev))


def _errors(row: dict, prefix: str, rep) -> None:
    row[f"{prefix}frob_scaled"] = rep.frob_scaled
    if not prefix:
        row["frob"] = rep.frob
        row["support_exact"] = rep.support_exact
    row[f"{prefix}op_norm"] = rep.op_norm
    row[f"{prefix}entry_max"] = rep.entry_max


def fourier_trial(st: Setting, s: SampleSet, row: dict) -> dict:
    row.update(status="ok", reason=None)
    try:
        table = sample_probe_table(s)
        lhat = SymmetricMatrixEstimate(assemble_Leta(table), "Leta", eta=st.eta, n=s.n, seed=s.seed)
    except DegenerateCharFn as exc:
        return dict(row, status="failed", reason=f"degenerate_charfn {exc.probe}")
    r1 = error_report(lhat, st.Leta)
    _errors(row, "stage1_", r1)
    dev = _phi_deviation(table, st.oracle_table)
    row["phi_dev_max"] = dev
    row["bound_phi"] = min(1.0, bound_phi_tail(s.n, dev)) if dev > 0 else 1.0
    b = bound_sigma_error(st.model.spectrum.lambda_max, st.model.mu, st.eta, r1.op_norm, r1.frob_scaled)
    row["bound_sigma"], row["bound_sigma_applicable"] = b
    try:
        prec = estimate_precision(lhat, st.eta)
    except IllConditionedPlugin as exc:
        return dict(row, status="failed", reason=f"ill_conditioned_plugin {exc.smallest:.3g}")
    _errors(row, "", error_report(prec, st.model.precision(), st.edges))
    return row


def bmt_trial(st: Setting, variant: str, X: np.ndarray, seed: int, row: dict) -> dict:
    row.update(status="ok", reason=None)
    bc = st.baseline_config()
    n, d = X.shape
    try:
        U = canonical_U(bc, n, d) if variant == "bmt_canonical" else improvised_U(bc)
    except ParameterError:
        return dict(row, status="failed", reason="parameter n too small for canonical U")
    row["U"] = U
    tau = tau_bound(bc, n, d, U)
    row["tau_U"], row["tau_applicable"] = tau
    row["bmt_condition"] = bmt_condition(bc, U, n, d)
    try:
        sig = estimate_sigma_bmt(X, replace(bc, U=U), seed=seed)
    except DegenerateCharFn as exc:
        return dict(row, status="failed", reason=f"degenerate_charfn {exc.probe}")
    r1 = error_report(sig, st.sigma)
    _errors(row, "stage1_", r1)
    s_min = st.model.spectrum.lambda_min_sigma
    row["bound_sigma"], row["bound_sigma_applicable"] = bound_inverse_error(s_min, r1.op_norm, r1.frob_scaled)
    try:
        prec = invert_baseline(sig)
    except IllConditionedPlugin as exc:
        return dict(row, status="failed", reason=f"ill_conditioned_plugin {exc.smallest:.3g}")
    _errors(row, "", error_report(prec, st.model.precision(), st.edges))
    return row


def run_estimator(st: Setting, estimator: str, s: SampleSet, row: dict) -> dict:
    t0 = time.perf_counter()
    if estimator == "fourier":
        row = fourier_trial(st, s, row)
    else:
        row = bmt_trial(st, estimator, s.X, s.seed, row)
    if st.cfg.timing:
        row["wall_ms"] = round(1000 * (time.perf_counter() - t0), 3)
    return row


def summary_rows(st: Setting, rows: list[dict]) -> list[dict]:
    """Per-estimator medians at each n, then one rate-slope row per estimator."""
    out = []
    metrics = ("frob_scaled", "frob", "op_norm", "entry_max", "stage1_frob_scaled", "stage1_op_norm", "stage1_entry_max")
    for est in st.cfg.estimators:
        pts1, pts2 = [], []
        for n in st.cfg.n_grid:
            cell = [r for r in rows if r["estimator"] == est and r["n"] == n]
            med = st.base_row(est, n)
            med.update(status="median", n_ok=sum(r["status"] == "ok" for r in cell))
            for m in metrics:
                vals = [r[m] for r in cell if r.get(m) is not None]
                med[m] = float(np.median(vals)) if vals else None
            out.append(med)
            if med["stage1_frob_scaled"]:
                pts1.append((n, med["stage1_frob_scaled"]))
            if med["frob_scaled"]:
                pts2.append((n, med["frob_scaled"]))
        slope = st.base_row(est, None)
        slope["status"] = "slope"
        slope["slope_stage1"] = fit_rate_slope(pts1) if len(pts1) >= 3 else None
        slope["slope_precision"] = fit_rate_slope(pts2) if len(pts2) >= 3 else None
        out.append(slope)
    return out


def run_sweep(cfg: ExperimentConfig, threads: int = 1) -> list[dict]:
    """Independent samples for every (estimator, n, trial) cell."""
    st = Setting.from_config(cfg)
    cells = [(e, n, k) for e in cfg.estimators for n in cfg.n_grid for k in range(cfg.trials)]

    def one(cell):
        est, n, k = cell
        seed = derive_seed(cfg.master_seed, est, n, k)
        s = sample_field(st.model, n, st.eta, seed)
        return run_estimator(st, est, s, dict(st.base_row(est, n), trial=k, seed=seed))

    rows = _pmap(one, cells, threads)
    return rows + summary_rows(st, rows)


def run_compare(cfg: ExperimentConfig, threads: int = 1) -> list[dict]:
    """All estimators on the same SampleSet per (n, trial); BMT ignores Y."""
    st = Setting.from_config(cfg)
    cells = [(n, k) for n in cfg.n_grid for k in range(cfg.trials)]

    def one(cell):
        n, k = cell
        seed = derive_seed(cfg.master_seed, "shared", n, k)
        s = sample_field(st.model, n, st.eta, seed)
        return {e: run_estimator(st, e, s, dict(st.base_row(e, n), trial=k, seed=seed)) for e in cfg.estimators}

    by_cell = dict(zip(cells, _pmap(one, cells, threads)))
    rows = [by_cell[(n, k)][e] for e in cfg.estimators for n in cfg.n_grid for k in range(cfg.trials)]
    return rows + summary_rows(st, rows)


def run_concentration(cfg: ExperimentConfig, threads: int = 1) -> list[dict]:
    """Empirical tail frequency of ``|phi_n(t) - phi(t)| >= x`` over ``reps`` sample sets."""
    st = Setting.from_config(cfg)
    d = st.graph.d
    t = np.array(cfg.t if cfg.t is not None else np.eye(d)[0], dtype=float)
    if t.shape != (d,):
        raise ParameterError(f"probe t must have {d} entries")
    n = cfg.n if cfg.n is not None else cfg.n_grid[0]
    phi = exact_phi(st.model, st.eta, t)
    blocks = np.array_split(np.arange(cfg.reps), max(1, min(cfg.reps, 64)))

    def block(idx):
        return [abs(phi_n(sample_field(st.model, n, st.eta, derive_seed(cfg.master_seed, "concentration", n, int(r))), t).value - phi) for r in idx]

    dev = np.array([v for chunk in _pmap(block, blocks, threads) for v in chunk])
    rows = []
    for x in cfg.x_grid:
        exceed = int(np.sum(dev >= x))
        freq = exceed / cfg.reps
        se = binomial_se(exceed, cfg.reps)
        bound = bound_phi_tail(n, x)
        rows.append(dict(
            graph=cfg.graph, d=d, mu=cfg.mu, eta=st.eta, t=" ".join(format_cell(v) for v in t), n=n,
            reps=cfg.reps, x=x, exceed=exceed, freq=freq, se=se, bound=bound,
            bound_simplified=bound_phi_tail(n, x, simplified=True) if x <= 1 else None,
            within_bound=freq <= bound + 3 * se,
        ))
    return rows


def run_recovery(cfg: ExperimentConfig, threads: int = 1) -> list[dict]:
    """Exact-support success per (n, trial); ER graphs are redrawn per trial."""
    eta = cfg.resolved_eta
    settings = [Setting.from_config(cfg, k) if cfg.graph == "er" else None for k in range(cfg.trials)]
    if cfg.graph != "er":
        settings = [Setting.from_config(cfg)] * cfg.trials
    cells = [(n, k) for n in cfg.n_grid for k in range(cfg.trials)]

    def one(cell):
        n, k = cell
        st = settings[k]
        seed = derive_seed(cfg.master_seed, "recovery", n, k)
        row = dict(graph=cfg.graph, d=st.graph.d, p=cfg.p, mu=cfg.mu, eta=eta, tau=cfg.tau, n=n, trial=k,
                   seed=None if cfg.oracle else seed, n_edges=st.graph.n_edges, status="ok")
        try:
            if cfg.oracle:
                table = st.oracle_table
            else:
                table = sample_probe_table(sample_field(st.model, n, eta, seed))
            prec = estimate_precision(assemble_Leta(table), eta)
        except GFFError as exc:
            return dict(row, status="failed", reason=type(exc).__name__, success=False)
        row["entry_max"] = float(np.max(np.abs(prec.entries - st.model.precision())))
        row["success"] = recover_support(prec, cfg.tau) == st.graph.edge_set()
        return row

    rows = _pmap(one, cells, threads)
    out = list(rows)
    n_min = None
    for n in cfg.n_grid:
        succ = [r["success"] for r in rows if r["n"] == n]
        frac = float(np.mean(succ))
        out.append(dict(graph=cfg.graph, d=rows[0]["d"], p=cfg.p, mu=cfg.mu, eta=eta, tau=cfg.tau, n=n,
                        status="fraction", success_fraction=frac, n_trials=len(succ)))
        if n_min is None and frac >= RECOVERY_TARGET:
            n_min = n
    out.append(dict(graph=cfg.graph, d=rows[0]["d"], p=cfg.p, mu=cfg.mu, eta=eta, tau=cfg.tau,
                    status="threshold", n_min=n_min))
    return out


def run_generate(cfg: ExperimentConfig, out_path) -> WeightedGraph:
    g = build_graph(cfg)
    comments = [f"graph={cfg.graph} master_seed={cfg.master_seed}"]
    if cfg.graph == "er":
        comments[0] += f" p={cfg.p}"
        thr = connectivity_threshold(g.d)
        if cfg.p < thr:
            note = f"regime: p={cfg.p} is below the connectivity threshold log(d)/d={thr:.4g}"
            log.warning(note)
            comments.append(note)
    write_edgelist(g, out_path, comments)
    return g
