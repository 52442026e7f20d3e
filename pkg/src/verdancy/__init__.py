"""Verdancy: indoor plant climate monitoring service.

Decodes RuuviTag telemetry, evaluates readings against per-species
optimal ranges, and emits duration-gated alerts.  Includes replay and
simulation paths so the whole pipeline can be exercised without hardware.
"""

__version__ = "0.1.0"
