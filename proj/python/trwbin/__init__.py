"""Sequential tree-reweighted message passing for binary pairwise MRFs.

Exact MAP inference on trees, monotone lower-bound maximization on cyclic
graphs, partial-optimality certificates, and a brute-force oracle for
desk-scale validation. The heavy lifting lives in the compiled `_core`
extension; this package re-exports its public surface.
"""

from ._core import *  # noqa: F401,F403

__all__ = [name for name in dir() if not name.startswith("_")]
