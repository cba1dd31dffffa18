"""Quantum-field observables of a dispersive, dissipative dielectric.

Submodules: ``units``, ``medium``, ``quadrature``, ``kernels``,
``correlator``, ``detector1d``, ``detector3d``, ``surface``, ``experiment``
and ``cli``.
"""

from importlib import metadata as _metadata

try:
    __version__ = _metadata.version("artifact")
except _metadata.PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.1.0"

from .medium import MediumParams  # noqa: E402

__all__ = ["MediumParams", "__version__"]
