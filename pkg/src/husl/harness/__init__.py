"""Experiment orchestration: configuration, scenario runs, logs, reports and the CLI."""
from husl.harness.analysis import AnalysisReport, ComparisonTable, analyze_run, compare_runs, gcsm_stats, load_report
from husl.harness.config import ConfigError, ScenarioConfig, config_from_dict, load_config, save_config
from husl.harness.run import RunResult, build_walker, run_scenario, tick_count
from husl.harness.runlog import COLUMNS, ConfigMismatchError, LogFormatError, RunLog, read_log, write_log

__all__ = [
    "AnalysisReport", "ComparisonTable", "analyze_run", "compare_runs", "gcsm_stats", "load_report",
    "ConfigError", "ScenarioConfig", "config_from_dict", "load_config", "save_config",
    "RunResult", "build_walker", "run_scenario", "tick_count",
    "COLUMNS", "ConfigMismatchError", "LogFormatError", "RunLog", "read_log", "write_log",
]
