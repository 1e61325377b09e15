"""Hybrid analog/digital zero-forcing for a multi-pair two-way massive-MIMO relay.

Modules: ``channel`` (fading models and estimation), ``hybrid`` (relay
weights), ``rate`` (Monte Carlo and large-N rates), ``energy`` (EE model and
optimizers), ``harness`` (configs, experiments, CLI).
"""
__version__ = "0.1.0"
