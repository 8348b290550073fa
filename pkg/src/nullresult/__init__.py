"""Simulation and analysis toolkit for a null-result-detection EPR experiment.

Submodules:

``model``       analytic four-channel probability tables
``bell``        correlations, CHSH, local bounds, count estimators
``montecarlo``  seeded per-pair sampler producing coincidence counts
``spacetime``   detour geometry and frame-invariant event ordering
``signaling``   superluminal round trips and the causal-paradox test
``scenario``    scenario and counts file formats
``report``      report assembly used by the command line
"""

__version__ = "0.1.0"
