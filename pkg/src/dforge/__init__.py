"""Design-quality analysis of unitary ensembles generated by measurement-based gadgets."""

__version__ = "0.1.0"

from .errors import CapacityError, ConvergenceError, DforgeError, DomainError  # noqa: E402
from .ensembles import UnitaryEnsemble  # noqa: E402
from .gadgets import GraphGadget, build_gadget, enumerate_ensemble, preset  # noqa: E402

__all__ = [
    "__version__", "DforgeError", "DomainError", "CapacityError", "ConvergenceError",
    "UnitaryEnsemble", "GraphGadget", "build_gadget", "enumerate_ensemble", "preset",
]
