"""Desk-scale numerics for operators commuting with the Volterra operator.

Modules: :mod:`~voltlab.fnspace` (discretized L_p), :mod:`~voltlab.operators`
(concrete operators), :mod:`~voltlab.algebra` (convolution algebra and
commutator identities), :mod:`~voltlab.dynamics` (orbits, angle statistics,
Kronecker searches), :mod:`~voltlab.weakclosure` (Gaussian separation
certificates) and :mod:`~voltlab.cli` (scenario runner).
"""

from ._kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
