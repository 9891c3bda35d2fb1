"""Universal-minimax hypothesis testing.

Analytic error-tradeoff curves for the normal location problem (LRT, GLRT,
training-data detectors), plug-in detectors for locally asymptotically
normal models, high-dimension asymptotics, and a deterministic Monte Carlo
harness that validates every curve by simulation.
"""

__version__ = "0.1.0"

from . import specfun, linalg, montecarlo, nlp_detect, lan_models, asymptotics  # noqa: F401,E402
