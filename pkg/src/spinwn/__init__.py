"""Spin-adapted fermionic generators: Lie closures, Wei-Norman products, circuits and ADAPT-VQE."""

__version__ = "0.1.0"

from .fermion import GeneratorSpec, OperatorExpr, build_generator, excitation, dn, up  # noqa: E402
from .kernels import BACKEND  # noqa: E402

__all__ = ["BACKEND", "GeneratorSpec", "OperatorExpr", "__version__", "build_generator", "dn", "excitation", "up"]
