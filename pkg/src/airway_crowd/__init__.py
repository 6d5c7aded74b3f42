"""Crowdsourced airway annotation pipeline.

Generates 2D slice images at known airway locations in a chest CT volume,
serves them to untrained annotators as HITs, filters and aggregates the
collected two-ellipse (lumen + wall) annotations, and evaluates them against
expert area measurements.
"""

__version__ = "0.1.0"
