"""iqcsync: leader-follower tracking control with certified performance.

Builds feedback gains for interconnected linear systems whose coupling is
only known through integral quadratic constraints, certifies an upper
bound on the closed-loop consensus cost, and validates certificates by
simulating the network under admissible uncertainty realizations.
"""

from .graph import SpectralData, Topology, laplacian, spectral, transform_errors
from .model import (
    EdgeCouplingSet,
    FirstOrderLag,
    InputDelay,
    NormBounded,
    SampledSignal,
    SystemModel,
    apply_uncertainty,
    iqc_audit,
)
from .synthesis import (
    Certificate,
    optimize_bound,
    optimize_trace,
    synth_cor1,
    synth_thm1,
    synth_thm2,
    synth_thm3,
    synth_thm4,
)

__version__ = "0.1.0"
