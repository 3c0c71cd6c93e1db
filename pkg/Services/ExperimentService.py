"""
ExperimentService - builds the game pieces from an ExperimentSpec and runs the
experiments behind the CLI: seed sweeps, tradeoff frontier sweeps, condition
checks and estimation diagnostics. Every sweep goes through BatchProcessor.
"""

from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from Common.constants import (
    ASSUMPTION1_DEFAULT_REPS, ASSUMPTION1_GRID, COVERAGE_DEFAULT_REPS, DEFAULT_OUTPUT_DIR, MAX_WORKERS
)
from Common.errors import SpecValidationError, UnsupportedCardinalityError
from Common.experiment_spec import ExperimentSpec
from Factories.ObjectiveFactory import ObjectiveFactory, default_calibration_slack
from Factories.StrategyFactory import StrategyFactory
from Logging_file.logging_file import custom_logger
from Services.BatchProcessor import BatchProcessor
from Services.Engine.game_engine import RunConfig, run
from Services.Engine.metrics import MetricSuite, metric_rate_bound
from Services.Engine.trajectory import Trajectory
from Services.Estimation.diagnostics import assumption1_diagnostic, hat_set_coverage
from Services.Objectives.objective_catalog import KnowledgeMode, ObjectivePair
from Services.Pareto.frontier import frontier_bands, tradeoff_budgets
from Services.Probability.finite_distributions import ContextSpace, JointDistribution, tv_distance
from Services.Reporting.summary import build_summary, describe, final_values
from Services.Reporting.svg_chart import frontier_svg
from Services.Reporting.trajectory_csv import export_trajectory, format_value
from Services.Solvers.condition_checker import TwoResolutionReport, check_condition_two_resolutions
from Services.Solvers.solver_stats import collecting_statistics
from Services.Strategies.monitoring import Monitoring
from utils.atomic_io import write_csv_atomic, write_json_atomic, write_text_atomic

FRONTIER_COLUMNS = ("tau", "delta", "gc_mean", "gc_stderr", "dp_mean", "dp_stderr", "band_lower", "band_upper")
ASSUMPTION1_COLUMNS = ("t", "mean_tv2", "t_times_mean_tv2", "stderr")
COVERAGE_ROUNDS = (2 ** 8, 2 ** 10)


@dataclass
class ExperimentOutcome:
    summary: Dict[str, Any]
    files: List[Path] = field(default_factory=list)
    trajectories: List[Trajectory] = field(default_factory=list)


class ExperimentService:
    """Service class running one experiment spec"""

    def __init__(self, spec: ExperimentSpec, workers: int = MAX_WORKERS, out_dir: Optional[str] = None,
                 seed_override: Optional[int] = None):
        self.spec = spec
        self.workers = workers
        self.out_dir = Path(out_dir or spec.output_dir or DEFAULT_OUTPUT_DIR)
        self.seeds = [seed_override] if seed_override is not None else list(spec.seeds)
        self.monitoring = Monitoring(spec.monitoring)
        self.knowledge_mode = KnowledgeMode(spec.knowledge_mode)
        self.Q = self._joint_distribution()
        custom_logger.info(f"ExperimentService initialized for instance '{spec.instance.name}'")

    def _joint_distribution(self) -> JointDistribution:
        instance = self.spec.instance
        space = ContextSpace(tuple(instance.x_labels), instance.n_sensitive)
        return JointDistribution.from_config([list(triple) for triple in instance.q], space)

    def _objective_components(self) -> List[Dict[str, Any]]:
        return [{"name": objective.name, "params": self.spec.resolve_params(objective.params),
                 "target": objective.target}
                for objective in self.spec.objectives]

    def build_pair(self) -> ObjectivePair:
        if not self.spec.objectives:
            raise SpecValidationError("This command needs at least one objective")
        return ObjectiveFactory.create_combined(self._objective_components(), self.Q, self.knowledge_mode,
                                                self.monitoring)

    def _calibration_levels(self) -> Optional[int]:
        if self.spec.metrics.N is not None:
            return self.spec.metrics.N
        for objective in self.spec.objectives:
            if "N" in objective.params:
                return int(objective.params["N"])
        return None

    def metric_suite(self, pair: ObjectivePair) -> MetricSuite:
        reward = self.spec.reward_tensor(self.spec.metrics.reward) if self.spec.metrics.reward else None
        N = self._calibration_levels()
        if N is not None and pair.payoff.n_actions != N:
            N = None
        return MetricSuite(target=pair.target, N=N, gammas=self.Q.gammas, reward=reward)

    def build_run_config(self, seed: int, pair: ObjectivePair) -> RunConfig:
        """Fresh strategy instances for one seed"""
        if self.spec.player is None or self.spec.nature is None:
            raise SpecValidationError("Runs need both a player and a nature block")
        nature = StrategyFactory.create_nature(self.spec.nature.name, self.spec.resolve_params(self.spec.nature.params),
                                               pair, self.Q, self.monitoring)
        player = StrategyFactory.create_player(self.spec.player.name,
                                               self.spec.resolve_params(self.spec.player.params),
                                               pair, self.Q, self.monitoring, nature)
        return RunConfig(Q=self.Q, pair=pair, player=player, nature=nature, monitoring=self.monitoring,
                         horizon=self.spec.horizon, seed=seed, metric_suite=self.metric_suite(pair))

    def _run_seeds(self, pair: ObjectivePair, description: str) -> List[Trajectory]:
        # configs are built up front so spec problems surface before any worker starts
        configs = [self.build_run_config(seed, pair) for seed in self.seeds]
        processor = BatchProcessor(max_workers=self.workers, description=description)
        results = processor.process([(config.seed, (lambda config=config: run(config))) for config in configs])
        return [result.payload for result in results]

    @custom_logger.log_around
    def run_experiment(self) -> ExperimentOutcome:
        with collecting_statistics() as stats:
            pair = self.build_pair()
            trajectories = self._run_seeds(pair, f"run {self.spec.instance.name}")

        files = [export_trajectory(traj, self.out_dir / f"trajectory_seed{traj.seed}.csv") for traj in trajectories]
        metrics = final_values([traj.metric_series for traj in trajectories])
        K = pair.range_constant()
        extra = {
            "objective": pair.name,
            "player": self.spec.player.name,
            "nature": self.spec.nature.name,
            "monitoring": self.monitoring.value,
            "knowledge_mode": self.knowledge_mode.value,
            "range_constant": K,
            "rate_bound": metric_rate_bound(K, self.spec.horizon),
            "empirical_B": max(traj.empirical_B(pair.target) for traj in trajectories),
            "mean_squared_distance": float(np.mean([pair.target.distance(traj.m_bar) ** 2
                                                    for traj in trajectories])),
            "metric_flags": {str(traj.seed): {column: {str(t): reason for t, reason in flags.items()}
                                              for column, flags in traj.metric_flags.items()}
                             for traj in trajectories if traj.metric_flags},
        }
        summary = build_summary(self.spec.instance.name, "run", self.spec.horizon, self.seeds, metrics,
                                stats.to_dict(), extra)
        files.append(write_json_atomic(self.out_dir / "summary.json", summary))
        return ExperimentOutcome(summary, files, trajectories)

    def _tv(self) -> float:
        if self.Q.shape[1] != 2:
            raise UnsupportedCardinalityError("The tradeoff frontier needs two sensitive groups")
        return tv_distance(self.Q.conditional(0), self.Q.conditional(1))

    def _pareto_run(self, tau: float, seed: int, N: int, tv_value: float) -> Trajectory:
        _, delta = tradeoff_budgets(tv_value, tau, self.monitoring)
        components = [{"name": "group_calibration", "params": {"N": N}},
                      {"name": "demographic_parity", "params": {"N": N, "delta": delta}}]
        pair = ObjectiveFactory.create_combined(components, self.Q, KnowledgeMode.KNOWN_Q, self.monitoring)
        aware = self.monitoring is Monitoring.AWARE
        nature = StrategyFactory.create_nature("pareto_lower_aware" if aware else "pareto_lower_unaware", {},
                                               pair, self.Q, self.monitoring)
        player = StrategyFactory.create_player("pareto_oracle_aware" if aware else "pareto_oracle_unaware",
                                               {"tau": tau, "N": N}, pair, self.Q, self.monitoring, nature)
        suite = MetricSuite(target=pair.target, N=N, gammas=self.Q.gammas)
        config = RunConfig(Q=self.Q, pair=pair, player=player, nature=nature, monitoring=self.monitoring,
                           horizon=self.spec.horizon, seed=seed, metric_suite=suite)
        return run(config)

    @custom_logger.log_around
    def pareto_experiment(self) -> ExperimentOutcome:
        if self.spec.pareto is None:
            raise SpecValidationError("The pareto command needs a 'pareto' block with taus and N")
        N = self.spec.pareto.N
        taus = [float(tau) for tau in self.spec.pareto.taus]
        tv_value = self._tv()
        jobs = [((tau, seed), (lambda tau=tau, seed=seed: self._pareto_run(tau, seed, N, tv_value)))
                for tau in taus for seed in self.seeds]
        with collecting_statistics() as stats:
            results = BatchProcessor(max_workers=self.workers, description="pareto").process(jobs)

        rows, metrics = [], {}
        for tau, label in zip(taus, self.spec.pareto.taus):
            trajectories = [result.payload for result in results if result.key[0] == tau]
            gc = describe([traj.metric_series["Cgr_t"][-1] for traj in trajectories])
            dp = describe([traj.metric_series["D_t"][-1] for traj in trajectories])
            lower, upper = frontier_bands(tv_value, tau, N, self.monitoring)
            metrics[f"Cgr_t[tau={label}]"] = [traj.metric_series["Cgr_t"][-1] for traj in trajectories]
            metrics[f"D_t[tau={label}]"] = [traj.metric_series["D_t"][-1] for traj in trajectories]
            rows.append({"tau": tau, "delta": tau * tv_value, "gc_mean": gc["mean"], "gc_stderr": gc["stderr"],
                         "dp_mean": dp["mean"], "dp_stderr": dp["stderr"],
                         "band_lower": lower, "band_upper": upper})

        files = [
            write_csv_atomic(self.out_dir / "frontier.csv", FRONTIER_COLUMNS,
                             [{key: format_value(value) for key, value in row.items()} for row in rows]),
            self._write_frontier_svg(rows, tv_value),
        ]
        extra = {"monitoring": self.monitoring.value, "tv": tv_value, "N": N, "frontier": rows}
        summary = build_summary(self.spec.instance.name, "pareto", self.spec.horizon, self.seeds, metrics,
                                stats.to_dict(), extra)
        files.append(write_json_atomic(self.out_dir / "summary.json", summary))
        return ExperimentOutcome(summary, files)

    def _write_frontier_svg(self, rows: List[Dict[str, float]], tv_value: float) -> Path:
        svg = frontier_svg([row["delta"] for row in rows], [row["gc_mean"] for row in rows],
                           [row["band_lower"] for row in rows], [row["band_upper"] for row in rows],
                           title=f"{self.spec.instance.name}: {self.monitoring.value} Nature, TV={tv_value:.3g}")
        return write_text_atomic(self.out_dir / "frontier.svg", svg)

    @custom_logger.log_around
    def check_experiment(self) -> TwoResolutionReport:
        pair = self.build_pair()
        resolutions = [float(r) for r in self.spec.check.resolutions]
        report = check_condition_two_resolutions(pair.payoff, self.Q, pair.target, self.monitoring, resolutions,
                                                 tolerance=float(self.spec.check.tolerance), workers=self.workers)
        payload = {"instance": self.spec.instance.name, "objective": pair.name,
                   "monitoring": self.monitoring.value, **report.to_dict()}
        write_json_atomic(self.out_dir / "check_report.json", payload)
        return report

    @custom_logger.log_around
    def diagnose_experiment(self, reps: int = ASSUMPTION1_DEFAULT_REPS) -> ExperimentOutcome:
        seed = self.seeds[0]
        rows = assumption1_diagnostic(self.Q, reps, seed=seed, grid=ASSUMPTION1_GRID, workers=self.workers)
        files = [write_csv_atomic(self.out_dir / "assumption1.csv", ASSUMPTION1_COLUMNS,
                                  [{"t": str(row.t), "mean_tv2": format_value(row.mean_tv2),
                                    "t_times_mean_tv2": format_value(row.t_times_mean_tv2),
                                    "stderr": format_value(row.stderr)} for row in rows])]
        summary: Dict[str, Any] = {"instance": self.spec.instance.name, "mode": "diagnose",
                                   "assumption1": [row.__dict__ for row in rows]}
        player = self.spec.player
        if player is not None and player.name == "doubling_unknown_target":
            N = int(player.params["N"])
            tau = float(Decimal(str(player.params["tau"])))
            slack = float(Decimal(str(player.params.get("calibration_slack", default_calibration_slack(N)))))
            summary["coverage"] = [
                hat_set_coverage(self.Q, tau, N, T_r, COVERAGE_DEFAULT_REPS, seed, self.monitoring, slack,
                                 workers=self.workers).to_dict()
                for T_r in COVERAGE_ROUNDS
            ]
        files.append(write_json_atomic(self.out_dir / "diagnostics.json", summary))
        return ExperimentOutcome(summary, files)
