"""Metrics, CVR factors and the virtual-event harness."""
from .cvr import CvrResult, aggregate_cvr_report, cvr_factor, event_voltages, voltage_levels
from .harness import (SUMMER, VARIANTS, WINTER, EvalProtocol, EvaluationResult, choose_days, edge_error_shares,
                      event_template, run_virtual_evaluation)
from .metrics import UNITS, DayMetrics, MetricReport, day_metrics, metrics

__all__ = [
    "CvrResult", "DayMetrics", "EvalProtocol", "EvaluationResult", "MetricReport", "SUMMER", "UNITS", "VARIANTS",
    "WINTER", "aggregate_cvr_report", "choose_days", "cvr_factor", "day_metrics", "edge_error_shares",
    "event_template", "event_voltages", "metrics", "run_virtual_evaluation", "voltage_levels",
]
