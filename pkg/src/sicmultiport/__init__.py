"""Linear-optical SIC-POVM measurement devices for qubits and qutrits.

Modules, in pipeline order: :mod:`~sicmultiport.sic` (SIC construction),
:mod:`~sicmultiport.naimark` (dilation unitaries),
:mod:`~sicmultiport.compiler` (beam-splitter/phase-shifter netlists),
:mod:`~sicmultiport.optics` (simulation and sampling) and
:mod:`~sicmultiport.tomography` (state estimation).
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
