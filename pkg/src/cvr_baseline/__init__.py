"""Counterfactual baselines for Conservation Voltage Reduction events.

Iterative bidirectional gradient-boosted restoration of the event window,
CVR-factor computation and estimation-quality metrics.
"""
__version__ = "0.1.0"
