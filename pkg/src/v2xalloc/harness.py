"""Monte Carlo driver: drops, allocators, held-out evaluation and sweeps.

One drop = one geometry + shadowing + fading realization.  Every enabled
allocator produces a spectrum-reuse assignment with powers; each matched pair
is then scored on a shared set of M fresh vehicle-side channel realizations
(outage = fraction of realizations whose VUE SINR falls below the threshold).
Drops use RNG streams derived from (seed, drop_index), so results do not
depend on execution order.

Method identifiers:
  opt   - per-pair corner optimum at the nominal (conditional-mean) gains
  brra  - moment-based robust allocation (margin + bisection)
  slaa  - self-learning, anchors from sample-average CSI
  slwa  - self-learning, anchors from per-link worst-sample CSI
  nrra  - non-robust, large-scale gains only
  apra  - large-scale with outage-transformed VUE threshold
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import baselines, bernstein, channel, selflearn
from .config import ScenarioConfig
from .matching import CapacityMatrix, ReuseAssignment, build_capacity_matrix, hungarian_max_weight

ALL_METHODS = ("opt", "brra", "slaa", "slwa", "nrra", "apra")

SWEEP_PARAMS = {
    "p_max_cue": "p_max_cue_dbm",
    "p_max_vue": "p_max_vue_dbm",
    "speed": "vehicle_speed_kmh",
    "gamma_min_cue": "sinr_min_cue",
    "gamma_min_vue": "sinr_min_vue",
}


@dataclass(frozen=True)
class MethodDropStats:
    """Outcome of one allocator on one drop."""

    assignment: ReuseAssignment
    matrix: CapacityMatrix
    sum_capacity_bps: float
    pair_outage: np.ndarray       # per transmitting matched pair
    mean_vue_sinr: float          # over transmitting pairs x test realizations
    feasibility_rate: float       # transmitting real pairs / num_vues

    @property
    def outage(self) -> float:
        return float(np.mean(self.pair_outage)) if self.pair_outage.size else float("nan")


@dataclass(frozen=True)
class DropResult:
    drop_index: int
    lam: float
    methods: dict[str, MethodDropStats]


def drop_rng(seed: int, drop_index: int) -> np.random.Generator:
    """Independent per-drop stream; identical regardless of execution order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(drop_index,)))


# ---------------------------------------------------------------------------
# per-pair solver factories
# ---------------------------------------------------------------------------

def _corner_pair_solver(g_d, g_x, g_c, g_b, gamma_c, gamma_d, sigma2, caps, bw):
    p_max_c, p_max_d = caps

    def solver(j: int, s: int):
        sol = baselines.solve_corner(
            g_d[s], g_x[j, s], g_c[j], g_b[s], gamma_c, gamma_d, sigma2,
            p_max_c, p_max_d, bw,
        )
        return (sol.capacity_bps, sol.p_c_w, sol.p_d_w) if sol.feasible else (0.0, 0.0, 0.0)

    return solver


def bernstein_pair_params(cfg: ScenarioConfig, link: channel.LinkState, j: int, s: int):
    """Nominal/deviation gain description of candidate pair (j, s).

    The nominal gain is the conditional mean given the estimate; the deviation
    half-width scales the mean error power (1-lambda^2)*omega by the
    configurable box factor, clamped so the interval stays nonnegative.
    """
    lam2 = link.lam**2
    q = cfg.deviation_box_scale
    g_bar_d = link.g_bar_d[s]
    g_bar_x = link.g_bar_cross[j, s]
    g_hat_d = min((1.0 - lam2) * link.omega_d[s] * q, g_bar_d)
    g_hat_x = min((1.0 - lam2) * link.omega_cross[j, s] * q, g_bar_x)
    return bernstein.BernsteinParams(
        g_bar_d=g_bar_d, g_bar_cross=g_bar_x, g_hat_d=g_hat_d, g_hat_cross=g_hat_x,
        family=bernstein.DistributionFamily.from_name(cfg.bernstein_family),
        beta=cfg.outage_prob, gamma_min_d=cfg.sinr_min_vue, sigma2=cfg.noise_power_w,
        g_c=link.g_c[j], g_b=link.g_b[s], gamma_min_c=cfg.sinr_min_cue,
        p_max_c=cfg.p_max_cue_w, p_max_d=cfg.p_max_vue_w, bandwidth_hz=cfg.bandwidth_hz,
    )


def _bernstein_pair_solver(cfg, link):
    xi = cfg.bisection_xi_w

    def solver(j: int, s: int):
        res = bernstein.bisection_power_allocation(bernstein_pair_params(cfg, link, j, s), xi)
        if not res.feasible:
            return (0.0, 0.0, 0.0)
        return (res.capacity_bps, res.power.p_c_w, res.power.p_d_w)

    return solver


def _selflearn_pair_solver(cfg, link, mode, sample_d, sample_x, k_star):
    """Calibrate the shared radius once, then solve pairs in closed form.

    The radius couples all designated pairs through the min-mapping, so it is
    learned from the identity pairing (VUE s with CUE s) and reused for every
    candidate pair, each with its own anchor.  Anchors must keep nearly all
    samples inside their half-space (a mean-tight anchor strands about half
    of them, collapsing the learned region), so both modes get a
    sample-coverage floor on the VUE power: the joint exceedance budget N-k*
    is split evenly across the coupled pairs.  Worst-mode anchors trim twice
    that budget of extreme draws per tail: deeper extremes protect beyond the
    level the calibration certifies and only destroy feasibility.
    """
    n, s_count = sample_d.shape[0], cfg.num_vues
    sigma2, gamma_c, gamma_d = cfg.noise_power_w, cfg.sinr_min_cue, cfg.sinr_min_vue
    caps = (cfg.p_max_cue_w, cfg.p_max_vue_w)
    budget = max(1, (n - k_star) // s_count)
    cover = n - budget
    trim = 2 * budget if mode == selflearn.WORST else 0

    def anchor_for(j: int, s: int):
        return selflearn.initial_feasible(
            mode, sample_d[:, s], sample_x[:, j, s], link.g_c[j], link.g_b[s],
            gamma_c, gamma_d, sigma2, caps[0], caps[1],
            coverage_count=cover, trim_count=trim,
        )

    ident_anchors = [anchor_for(s, s) for s in range(s_count)]
    if all(a is None for a in ident_anchors):
        return None, None
    samples = selflearn.SampleSet(
        g_d=sample_d, g_cross=np.stack([sample_x[:, s, s] for s in range(s_count)], axis=1)
    )
    mapped = selflearn.map_samples(samples, ident_anchors, gamma_d)
    r_d = selflearn.calibrate_radius(mapped, k_star)
    if r_d <= 0:
        return None, r_d

    def solver(j: int, s: int):
        anc = anchor_for(j, s)
        if anc is None:
            return (0.0, 0.0, 0.0)
        sol = selflearn.closed_form_power(
            selflearn.AffineUncertaintySet(anc[0], anc[1], r_d),
            link.g_c[j], link.g_b[s], gamma_c, sigma2, caps[0], caps[1], cfg.bandwidth_hz,
        )
        return (sol.capacity_bps, sol.p_c_w, sol.p_d_w) if sol.feasible else (0.0, 0.0, 0.0)

    return solver, r_d


# ---------------------------------------------------------------------------
# drops
# ---------------------------------------------------------------------------

def _evaluate(
    cfg: ScenarioConfig,
    matrix: CapacityMatrix,
    assignment: ReuseAssignment,
    test_g_d: np.ndarray,
    test_g_x: np.ndarray,
) -> MethodDropStats:
    sigma2 = cfg.noise_power_w
    outages = []
    sinr_means = []
    transmitting = 0
    total = 0.0
    for j, s in zip(range(assignment.column_of_row.shape[0]), assignment.column_of_row):
        total += matrix.capacity[j, s]
        if matrix.is_virtual(s) or matrix.capacity[j, s] <= 0.0:
            continue
        transmitting += 1
        p_c, p_d = matrix.p_c_w[j, s], matrix.p_d_w[j, s]
        sinr = channel.sinr_vue(p_c, p_d, test_g_d[:, s], test_g_x[:, j, s], sigma2)
        outages.append(float(np.mean(sinr < cfg.sinr_min_vue)))
        sinr_means.append(float(np.mean(sinr)))
    return MethodDropStats(
        assignment=assignment,
        matrix=matrix,
        sum_capacity_bps=float(total),
        pair_outage=np.asarray(outages),
        mean_vue_sinr=float(np.mean(sinr_means)) if sinr_means else float("nan"),
        feasibility_rate=transmitting / cfg.num_vues,
    )


def run_drop(
    cfg: ScenarioConfig,
    drop_index: int,
    methods: tuple[str, ...] = ALL_METHODS,
) -> DropResult:
    """Generate one drop, run the enabled allocators, score on held-out draws."""
    unknown = set(methods) - set(ALL_METHODS)
    if unknown:
        raise ValueError(f"unknown methods: {sorted(unknown)}")
    rng = drop_rng(cfg.rng_seed, drop_index)
    link = channel.build_link_state(cfg, rng)
    j, s = cfg.num_cues, cfg.num_vues
    n, m = cfg.sample_count, cfg.test_count
    h_d_sq = np.abs(link.h_hat_d) ** 2
    h_x_sq = np.abs(link.h_hat_cross) ** 2

    # learning samples: amplitude-composed around the block estimate, so the
    # sampled gains carry the full estimate-error interaction
    sample_d = np.abs(channel.sample_true_channel(
        np.broadcast_to(link.h_hat_d, (n, s)), link.lam, rng)) ** 2 * link.omega_d
    sample_x = np.abs(channel.sample_true_channel(
        np.broadcast_to(link.h_hat_cross, (n, j, s)), link.lam, rng)) ** 2 * link.omega_cross
    # held-out evaluation: power-composed gains per the SINR model
    test_d = channel.v2v_true_gain(
        link.omega_d, h_d_sq, link.lam, channel.error_power(rng, (m, s)))
    test_x = channel.v2v_true_gain(
        link.omega_cross, h_x_sq, link.lam, channel.error_power(rng, (m, j, s)))

    sigma2 = cfg.noise_power_w
    caps = (cfg.p_max_cue_w, cfg.p_max_vue_w)
    bw = cfg.bandwidth_hz
    gamma_c, gamma_d = cfg.sinr_min_cue, cfg.sinr_min_vue

    solvers = {}
    if "opt" in methods:
        solvers["opt"] = _corner_pair_solver(
            link.g_bar_d, link.g_bar_cross, link.g_c, link.g_b,
            gamma_c, gamma_d, sigma2, caps, bw)
    if "nrra" in methods:
        solvers["nrra"] = _corner_pair_solver(
            link.omega_d, link.omega_cross, link.omega_c, link.omega_b,
            gamma_c, gamma_d, sigma2, caps, bw)
    if "apra" in methods:
        solvers["apra"] = _corner_pair_solver(
            link.omega_d, link.omega_cross, link.omega_c, link.omega_b,
            gamma_c, baselines.apra_threshold(gamma_d, cfg.outage_prob), sigma2, caps, bw)
    if "brra" in methods:
        solvers["brra"] = _bernstein_pair_solver(cfg, link)
    if "slaa" in methods or "slwa" in methods:
        k_star = selflearn.calibration_index(n, cfg.outage_prob, cfg.varsigma)
        for name, mode in (("slaa", selflearn.AVERAGE), ("slwa", selflearn.WORST)):
            if name not in methods:
                continue
            solver, _ = _selflearn_pair_solver(cfg, link, mode, sample_d, sample_x, k_star)
            solvers[name] = solver  # None when the drop admits no learned region

    results = {}
    for name in methods:
        solver = solvers.get(name)
        if solver is None:
            solver = lambda jj, ss: (0.0, 0.0, 0.0)
        matrix = build_capacity_matrix(solver, j, s, link.g_c, caps[0], sigma2, bw)
        assignment, _ = hungarian_max_weight(matrix)
        results[name] = _evaluate(cfg, matrix, assignment, test_d, test_x)
    return DropResult(drop_index=drop_index, lam=link.lam, methods=results)


# ---------------------------------------------------------------------------
# aggregation and sweeps
# ---------------------------------------------------------------------------

def empirical_cdf(values) -> np.ndarray:
    """Right-continuous empirical CDF as a (value, cumulative fraction) table."""
    arr = np.sort(np.asarray(values, dtype=float))
    if arr.size == 0:
        raise ValueError("empirical_cdf needs at least one value")
    uniq, counts = np.unique(arr, return_counts=True)
    frac = np.cumsum(counts) / arr.size
    return np.column_stack([uniq, frac])


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter over a monotone grid."""

    param: str
    grid: tuple[float, ...]
    drops: int
    methods: tuple[str, ...] = ALL_METHODS

    def __post_init__(self) -> None:
        if self.param not in SWEEP_PARAMS:
            raise ValueError(f"param must be one of {sorted(SWEEP_PARAMS)}")
        if len(self.grid) == 0:
            raise ValueError("grid must be nonempty")
        diffs = np.diff(self.grid)
        if not (np.all(diffs >= 0) or np.all(diffs <= 0)):
            raise ValueError("grid must be monotone")
        if self.drops < 1:
            raise ValueError("drops must be >= 1")


def aggregate_drops(cfg: ScenarioConfig, methods, drops: int) -> dict[str, dict[str, float]]:
    """Mean capacity / outage / SINR / feasibility per method over ``drops``."""
    per_method: dict[str, dict[str, list]] = {
        name: {"cap": [], "outage": [], "sinr": [], "feas": []} for name in methods
    }
    for d in range(drops):
        result = run_drop(cfg, d, tuple(methods))
        for name in methods:
            stats = result.methods[name]
            per_method[name]["cap"].append(stats.sum_capacity_bps)
            per_method[name]["outage"].append(stats.outage)
            per_method[name]["sinr"].append(stats.mean_vue_sinr)
            per_method[name]["feas"].append(stats.feasibility_rate)
    out = {}
    for name, acc in per_method.items():
        with np.errstate(invalid="ignore"):
            out[name] = {
                "mean_cue_capacity_bps": float(np.mean(acc["cap"])),
                "outage_prob": float(np.nanmean(acc["outage"])) if np.any(
                    np.isfinite(acc["outage"])) else float("nan"),
                "mean_vue_sinr": float(np.nanmean(acc["sinr"])) if np.any(
                    np.isfinite(acc["sinr"])) else float("nan"),
                "feasibility_rate": float(np.mean(acc["feas"])),
            }
    return out


SWEEP_COLUMNS = (
    "sweep_param", "value", "method", "mean_cue_capacity_bps", "mean_vue_sinr",
    "outage_prob", "feasibility_rate", "drops", "seed",
)

RAW_COLUMNS = (
    "sweep_param", "value", "method", "drop", "sum_capacity_bps", "outage",
    "mean_vue_sinr", "feasibility_rate",
)


def run_sweep(
    spec: SweepSpec,
    cfg: ScenarioConfig,
    out_path: str | Path | None = None,
    raw_path: str | Path | None = None,
) -> list[dict]:
    """Aggregate every grid point; optionally emit the summary / raw CSV files."""
    field_name = SWEEP_PARAMS[spec.param]
    rows: list[dict] = []
    raw_rows: list[dict] = []
    for value in spec.grid:
        point_cfg = cfg.replace(**{field_name: value})
        for d in range(spec.drops):
            result = run_drop(point_cfg, d, spec.methods)
            for name in spec.methods:
                stats = result.methods[name]
                raw_rows.append({
                    "sweep_param": spec.param, "value": value, "method": name,
                    "drop": d, "sum_capacity_bps": stats.sum_capacity_bps,
                    "outage": stats.outage, "mean_vue_sinr": stats.mean_vue_sinr,
                    "feasibility_rate": stats.feasibility_rate,
                })
        for name in spec.methods:
            sel = [r for r in raw_rows if r["method"] == name and r["value"] == value]
            caps = [r["sum_capacity_bps"] for r in sel]
            outs = [r["outage"] for r in sel]
            sinrs = [r["mean_vue_sinr"] for r in sel]
            feas = [r["feasibility_rate"] for r in sel]
            with np.errstate(invalid="ignore"):
                rows.append({
                    "sweep_param": spec.param, "value": value, "method": name,
                    "mean_cue_capacity_bps": float(np.mean(caps)),
                    "mean_vue_sinr": float(np.nanmean(sinrs)) if np.any(
                        np.isfinite(sinrs)) else float("nan"),
                    "outage_prob": float(np.nanmean(outs)) if np.any(
                        np.isfinite(outs)) else float("nan"),
                    "feasibility_rate": float(np.mean(feas)),
                    "drops": spec.drops, "seed": cfg.rng_seed,
                })
    if out_path is not None:
        _write_csv(out_path, SWEEP_COLUMNS, rows)
    if raw_path is not None:
        _write_csv(raw_path, RAW_COLUMNS, raw_rows)
    return rows


def _write_csv(path: str | Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row[k]) for k in columns})


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value
