"""Reduced-order biped with supernumerary balancing arms: plant, control, learning and gait metrics."""

__version__ = "0.1.0"
