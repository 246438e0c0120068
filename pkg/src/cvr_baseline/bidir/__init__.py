"""Bidirectional iterative baseline restoration."""
from .driver import (BaselineEstimate, EngineConfig, derive_weights, estimate_baseline, estimate_baseline_oneshot,
                     oneshot_from_estimate, select_pools, virtual_day_candidates)
from .forecast import RampBounds, SegmentForecast, forecast_segment, forecast_segment_detail, ramp_bounds, \
    ramp_bounds_from_loads
from .training import Direction, Geometry, TargetMode, TrainingSet, build_training_set, feature_row, geometry, \
    n_iterations, target_row
from .weights import FORWARD_ONLY, WeightEntry, WeightSchedule, reconcile_oneshot, reconcile_step, solve_oneshot, \
    solve_pair

__all__ = [
    "BaselineEstimate", "Direction", "EngineConfig", "FORWARD_ONLY", "Geometry", "RampBounds", "SegmentForecast",
    "TargetMode", "TrainingSet", "WeightEntry", "WeightSchedule", "build_training_set", "derive_weights",
    "estimate_baseline", "estimate_baseline_oneshot", "feature_row", "forecast_segment", "forecast_segment_detail",
    "geometry", "n_iterations", "oneshot_from_estimate", "ramp_bounds", "ramp_bounds_from_loads",
    "reconcile_oneshot", "reconcile_step", "select_pools", "solve_oneshot", "solve_pair", "target_row", "virtual_day_candidates",
]
