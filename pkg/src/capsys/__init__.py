"""Symplectic capacities, generalized systoles and the systolic index of convex bodies."""

__version__ = "0.1.0"

from . import capacities, dual, geometry, john, loops, paper_examples, zoll  # noqa: E402
from .capacities import CapacitySequence, ellipsoid_sequence, polydisc_sequence, sys_index  # noqa: E402
from .dual import SolveConfig, SystoleResult, solve  # noqa: E402
from .geometry import body_from_spec, make_ellipsoid, make_lagrangian_product, make_vpolytope  # noqa: E402
from .john import enclosing_ellipsoid  # noqa: E402
from .loops import FourierLoop, TimeLoop  # noqa: E402

__all__ = [
    "capacities", "dual", "geometry", "john", "loops", "paper_examples", "zoll",
    "CapacitySequence", "ellipsoid_sequence", "polydisc_sequence", "sys_index",
    "ClarkeDualSolver", "SolveConfig", "SystoleResult", "solve",
    "body_from_spec", "make_ellipsoid", "make_lagrangian_product", "make_vpolytope",
    "EnclosingEllipsoid", "enclosing_ellipsoid", "FourierLoop", "TimeLoop",
]


def __getattr__(name):
    # the estimators need scikit-learn, which is slow to import
    if name in ("ClarkeDualSolver", "EnclosingEllipsoid"):
        from . import estimators

        return getattr(estimators, name)
    raise AttributeError(f"module 'capsys' has no attribute {name!r}")
