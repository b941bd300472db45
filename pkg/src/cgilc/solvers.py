"""Learning-control iteration schemes over a counted plant oracle.

Four experiment-driven solvers share one loop: conjugate-direction updates
with measured conjugation coefficients (stochastic CG), the classical
Fletcher-Reeves recurrence (deterministic CG), and plain gradient descent
with either exact line searches or a decaying step schedule.  A model-based
norm-optimal one-shot update is included as a ground-truth baseline.

All optimal-step solvers use the same rule: eps = e.(Jp) / ||Jp||^2 applied
as f <- f + eps p, which is the exact minimizer of the quadratic cost along
p regardless of how p was produced.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gradients import deterministic_gradient, stochastic_gradient
from .lifted import LiftedSystem, Signal
from .oracle import PlantOracle
from .rng import MASK_STREAM, stream

SOLVER_KINDS = ("stoch_cg", "det_cg", "stoch_gd", "det_gd", "norm_optimal")
STEP_MODES = ("optimal_line_search", "decaying")
ESTIMATORS = ("single", "full")


class DegenerateDirectionError(ZeroDivisionError):
    """Search direction maps to (numerically) nothing through the plant."""


@dataclass(frozen=True)
class SolverConfig:
    kind: str
    max_iterations: int = 200
    reset_period: int | None = None
    step_mode: str = "optimal_line_search"
    decay_a: float | None = None
    decay_gamma: float = 1.0
    eps_denominator_tol: float = 1e-14
    cost_tol: float = 1e-16
    seed: int = 0
    estimator: str | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in SOLVER_KINDS:
            raise ValueError(f"unknown solver kind {self.kind!r}")
        if self.step_mode not in STEP_MODES:
            raise ValueError(f"unknown step mode {self.step_mode!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.reset_period is not None and self.reset_period < 1:
            raise ValueError("reset_period must be >= 1")
        if self.decay_a is not None and not self.decay_a > 0:
            raise ValueError("decay_a must be > 0")
        if not 0.5 < self.decay_gamma <= 1.0:
            raise ValueError("decay_gamma must lie in (0.5, 1]")
        if self.estimator is not None and self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if not self.label:
            object.__setattr__(self, "label", self.kind)

    @property
    def effective_estimator(self) -> str:
        if self.estimator is not None:
            return self.estimator
        return "full" if self.kind.startswith("det") else "single"


@dataclass(frozen=True)
class IterationRecord:
    j: int
    experiments_cum: int
    cost_measured: float
    cost_true: float
    epsilon: float | None
    tau: float | None
    reset: bool


@dataclass
class RunTrace:
    config: SolverConfig
    records: list[IterationRecord] = field(default_factory=list)
    final_input: Signal | None = None
    stop_reason: str = ""
    notes: str = ""

    @property
    def initial_cost_true(self) -> float:
        return self.records[0].cost_true

    @property
    def initial_cost_measured(self) -> float:
        return self.records[0].cost_measured

    def experiments_to_cost(self, threshold: float, measured: bool = False) -> int | None:
        """Cumulative experiments at the first record with cost <= threshold."""
        for rec in self.records:
            cost = rec.cost_measured if measured else rec.cost_true
            if cost <= threshold:
                return rec.experiments_cum
        return None


def conjugation_coefficient(Jp_prev: Signal, Jg_new: Signal) -> float:
    """Coefficient tau making g_new + tau p_prev conjugate to p_prev under J^T J.

    Both arguments are measured plant responses; no model knowledge enters.
    """
    denom = Jp_prev.norm_sq()
    if denom <= 0.0:
        raise DegenerateDirectionError("||J p_prev||^2 vanishes")
    return -Jp_prev.dot(Jg_new) / denom


def fletcher_reeves_coefficient(g_new: Signal, g_old: Signal) -> float:
    """Classical ratio ||g_new||^2 / ||g_old||^2; valid for exact gradients only."""
    denom = g_old.norm_sq()
    if denom <= 0.0:
        raise DegenerateDirectionError("||g_old||^2 vanishes")
    return g_new.norm_sq() / denom


def optimal_step(e: Signal, Jp: Signal) -> float:
    """Exact minimizer of ||r - J(f + eps p)||^2 over eps, from measured e and Jp."""
    denom = Jp.norm_sq()
    if denom <= 0.0:
        raise DegenerateDirectionError("||J p||^2 vanishes")
    return e.dot(Jp) / denom


def update_input(f: Signal, eps: float, p: Signal) -> Signal:
    """Next trial input f + eps p."""
    return f + eps * p


def _planned_experiments(j: int, cfg: SolverConfig, n_pairs: int, reset_due: bool,
                         decay_anchored: bool) -> int:
    """Experiments the upcoming iteration will consume, for budget checks."""
    n = 1  # error trial
    n += 1 if cfg.effective_estimator == "single" else n_pairs
    if cfg.kind == "stoch_cg" and j > 1 and not reset_due:
        n += 1  # probe J g for the conjugation coefficient
    if cfg.step_mode == "optimal_line_search":
        n += 1  # probe J p for the line search
    elif not decay_anchored and j == 1:
        n += 1  # one-off line-search probe that anchors the decay schedule
    return n


def _run_iterative(oracle: PlantOracle, cfg: SolverConfig,
                   budget: int | None = None) -> RunTrace:
    """Shared loop behind the stochastic/deterministic CG and GD solvers."""
    is_cg = cfg.kind in ("stoch_cg", "det_cg")
    use_fletcher_reeves = cfg.kind == "det_cg"
    single = cfg.effective_estimator == "single"
    optimal_mode = cfg.step_mode == "optimal_line_search"
    mask_rng = stream(cfg.seed, MASK_STREAM)

    trace = RunTrace(config=cfg, stop_reason="max_iterations")
    f = Signal.zeros("input", oracle.N, oracle.n_i)
    p: Signal | None = None
    g_prev: Signal | None = None
    Jp_prev: Signal | None = None
    gain_sq_est = 0.0  # running lower bound on ||J||^2 from probe responses
    cost0_true: float | None = None
    decay_a = cfg.decay_a
    n_pairs = oracle.n_i * oracle.n_o

    def observe(u: Signal, w: Signal) -> float:
        nonlocal gain_sq_est
        un = u.norm_sq()
        if un > 0.0:
            gain_sq_est = max(gain_sq_est, w.norm_sq() / un)
        return un

    for j in range(1, cfg.max_iterations + 1):
        reset_due = (is_cg and cfg.reset_period is not None and j > 1
                     and (j - 1) % cfg.reset_period == 0)
        if budget is not None:
            planned = _planned_experiments(j, cfg, n_pairs, reset_due, decay_a is not None)
            if oracle.snapshot_count() + planned > budget:
                trace.stop_reason = "budget"
                break

        e, cost_measured = oracle.run_trial(f)
        experiments_at_trial = oracle.snapshot_count()
        cost_true = oracle.true_cost(f)
        if cost0_true is None:
            cost0_true = cost_true
        if cost_true <= cfg.cost_tol * cost0_true:
            trace.records.append(IterationRecord(
                j, experiments_at_trial, cost_measured, cost_true, None, None, False))
            trace.stop_reason = "cost_tol"
            break

        if single:
            g = stochastic_gradient(oracle, e, rng=mask_rng).g_hat
        else:
            g = deterministic_gradient(oracle, e).g_hat

        tau: float | None = None
        reset_flag = False
        if is_cg and j > 1 and not reset_due:
            if use_fletcher_reeves:
                assert g_prev is not None
                denom = g_prev.norm_sq()
                if denom > 0.0:
                    tau = fletcher_reeves_coefficient(g, g_prev)
                    p = g + tau * p
                else:
                    p, reset_flag = g, True
            else:
                Jg = oracle.probe(g)
                observe(g, Jg)
                assert Jp_prev is not None and p is not None
                denom = Jp_prev.norm_sq()
                if denom > cfg.eps_denominator_tol * p.norm_sq() * gain_sq_est and denom > 0.0:
                    tau = conjugation_coefficient(Jp_prev, Jg)
                    p = g + tau * p
                else:
                    p, reset_flag = g, True
        else:
            p = g
            reset_flag = is_cg and j > 1  # scheduled reset to the gradient

        eps: float | None
        if optimal_mode or (decay_a is None and j == 1):
            Jp = oracle.probe(p)
            pn = observe(p, Jp)
            denom = Jp.norm_sq()
            if denom <= cfg.eps_denominator_tol * pn * gain_sq_est or denom <= 0.0:
                trace.records.append(IterationRecord(
                    j, experiments_at_trial, cost_measured, cost_true, None, tau, reset_flag))
                trace.stop_reason = "degenerate_direction"
                break
            eps = optimal_step(e, Jp)
            Jp_prev = Jp
            if not optimal_mode:
                decay_a = abs(eps)  # anchor the schedule to the first measured step
        else:
            # descend along the (uphill) gradient direction
            eps = -decay_a / float(j) ** cfg.decay_gamma

        f = update_input(f, eps, p)
        g_prev = g
        trace.records.append(IterationRecord(
            j, experiments_at_trial, cost_measured, cost_true, eps, tau, reset_flag))

    trace.final_input = f
    return trace


def run_stochastic_cg(oracle: PlantOracle, cfg: SolverConfig,
                      budget: int | None = None) -> RunTrace:
    """Conjugate-direction learning with measured tau and eps per iteration.

    Iteration 1 costs 3 experiments (trial, gradient, J p); later iterations
    add one J g probe for the conjugation coefficient, reusing the previous
    J p measurement, for 4 experiments total.
    """
    if cfg.kind != "stoch_cg":
        raise ValueError("config kind must be stoch_cg")
    return _run_iterative(oracle, cfg, budget)


def run_deterministic_cg(oracle: PlantOracle, cfg: SolverConfig,
                         budget: int | None = None) -> RunTrace:
    """CG with full selector-experiment gradients and the Fletcher-Reeves ratio."""
    if cfg.kind != "det_cg":
        raise ValueError("config kind must be det_cg")
    return _run_iterative(oracle, cfg, budget)


def run_gradient_descent(oracle: PlantOracle, cfg: SolverConfig,
                         budget: int | None = None) -> RunTrace:
    """Gradient descent (tau = 0) with optimal or decaying steps."""
    if cfg.kind not in ("stoch_gd", "det_gd"):
        raise ValueError("config kind must be stoch_gd or det_gd")
    return _run_iterative(oracle, cfg, budget)


def run_norm_optimal(oracle: PlantOracle, cfg: SolverConfig, system: LiftedSystem,
                     budget: int | None = None) -> RunTrace:
    """Model-based one-shot update f2 = f1 + (J^T J)^-1 J^T e1.

    Simulation-only reference; requires the true lifted operator.  Rank
    deficiency falls back to the pseudo-inverse and is noted on the trace.
    """
    if cfg.kind != "norm_optimal":
        raise ValueError("config kind must be norm_optimal")
    trace = RunTrace(config=cfg, stop_reason="completed")
    f1 = Signal.zeros("input", oracle.N, oracle.n_i)
    e1, cost1 = oracle.run_trial(f1)
    trace.records.append(IterationRecord(
        1, oracle.snapshot_count(), cost1, oracle.true_cost(f1), 1.0, None, False))
    delta, _, rank, _ = np.linalg.lstsq(system.matrix, e1.data, rcond=1e-12)
    if rank < system.matrix.shape[1]:
        trace.notes = f"rank-deficient model (rank {rank}); pseudo-inverse update"
    f2 = f1 + Signal(delta, "input", oracle.N, oracle.n_i)
    e2, cost2 = oracle.run_trial(f2)
    trace.records.append(IterationRecord(
        2, oracle.snapshot_count(), cost2, oracle.true_cost(f2), None, None, False))
    trace.final_input = f2
    return trace


def run_solver(oracle: PlantOracle, cfg: SolverConfig, budget: int | None = None,
               system: LiftedSystem | None = None) -> RunTrace:
    """Dispatch on cfg.kind; ``system`` is only needed for norm_optimal."""
    if cfg.kind == "stoch_cg":
        return run_stochastic_cg(oracle, cfg, budget)
    if cfg.kind == "det_cg":
        return run_deterministic_cg(oracle, cfg, budget)
    if cfg.kind in ("stoch_gd", "det_gd"):
        return run_gradient_descent(oracle, cfg, budget)
    if system is None:
        raise ValueError("norm_optimal requires model access (the lifted system)")
    return run_norm_optimal(oracle, cfg, system, budget)
