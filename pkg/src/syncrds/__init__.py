"""syncrds: Monte Carlo study of synchronization in order-preserving random dynamics.

The package ships six stochastic evolution engines behind one cocycle
interface, the partial orders their comparison principles run on, and the
pullback / equilibrium / synchronization diagnostics that make the collapse of
the random attractor observable at desk scale.
"""

__version__ = "0.1.0"

from .diagnostics import (
    attractor_estimate,
    equilibrium_cesaro,
    equilibrium_pushforward,
    interval_concentration,
    invariant_sampler,
    law_distance,
    order_preservation_test,
    pullback,
    sync_curve,
)
from .engines import (
    FbmConfig,
    FbmSdeEngine,
    OuEngine,
    ReflectedConfig,
    ReflectedEngine,
    SpmeConfig,
    SpmeEngine,
    TorusEngine,
    TwoWallConfig,
    TwoWallEngine,
    make_drift,
    make_engine,
    validate_drift,
)
from .grid import GridFunction, GridSpec, laplacian_apply, laplacian_solve, norm
from .noise import NoisePath, QSpec, gen_brownian, gen_fbm, gen_q_wiener
from .orders import Interval, OrderRelation, interval_contains, leq, normality_probe

__all__ = [
    "__version__",
    "NoisePath", "QSpec", "gen_brownian", "gen_fbm", "gen_q_wiener",
    "GridFunction", "GridSpec", "laplacian_apply", "laplacian_solve", "norm",
    "OrderRelation", "Interval", "leq", "interval_contains", "normality_probe",
    "OuEngine", "FbmSdeEngine", "ReflectedEngine", "TorusEngine", "SpmeEngine",
    "TwoWallEngine", "FbmConfig", "ReflectedConfig", "SpmeConfig", "TwoWallConfig",
    "make_engine", "make_drift", "validate_drift",
    "pullback", "sync_curve", "invariant_sampler", "equilibrium_pushforward",
    "equilibrium_cesaro", "interval_concentration", "law_distance",
    "order_preservation_test", "attractor_estimate",
]
