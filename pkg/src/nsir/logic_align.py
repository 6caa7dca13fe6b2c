"""CLS-vector fusion through the transport plan, and its similarity score.

The updated text representation is the chained product H^T . P . Z . cls,
evaluated right-to-left so no m x d intermediate is materialized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_DEGENERATE_NORM = 1e-12


class FusionError(Exception):
    pass


class DimensionMismatchError(FusionError):
    pass


class DegenerateFusionError(FusionError):
    """Fused vector collapsed to (near) zero before normalization."""


@dataclass(frozen=True)
class FusedVector:
    vector: np.ndarray  # (d,)
    was_normalized: bool


def fuse_cls(
    H: np.ndarray,
    P: np.ndarray,
    Z: np.ndarray,
    cls: np.ndarray,
    normalize: bool = True,
) -> FusedVector:
    """Fold the alignment plan and both token matrices into the CLS vector.

    H is m x d, P is m x n, Z is n x d, cls is length d. Raises
    DegenerateFusionError when the product is numerically zero (e.g. all
    Z rows orthogonal to cls), which callers treat as a per-document
    fallback signal.
    """
    H = np.asarray(H, dtype=np.float64)
    P = np.asarray(P, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    cls = np.asarray(cls, dtype=np.float64)
    if H.ndim != 2 or P.ndim != 2 or Z.ndim != 2 or cls.ndim != 1:
        raise DimensionMismatchError("expected 2-d H, P, Z and 1-d cls")
    m, d = H.shape
    n = Z.shape[0]
    if P.shape != (m, n) or Z.shape[1] != d or cls.shape[0] != d:
        raise DimensionMismatchError(
            f"shapes do not chain: H {H.shape}, P {P.shape}, Z {Z.shape}, cls {cls.shape}"
        )
    if not np.all(np.isfinite(cls)):
        raise DimensionMismatchError("cls vector must be finite")

    fused = H.T @ (P @ (Z @ cls))
    if not normalize:
        return FusedVector(vector=fused, was_normalized=False)
    norm = float(np.linalg.norm(fused))
    if norm < _DEGENERATE_NORM:
        raise DegenerateFusionError(f"fused norm {norm:.3e} below {_DEGENERATE_NORM:.0e}")
    return FusedVector(vector=fused / norm, was_normalized=True)


def score1(q: FusedVector, d: FusedVector) -> float:
    """Inner product of two fused (unit) vectors."""
    if q.vector.shape != d.vector.shape:
        raise DimensionMismatchError(
            f"fused dimensions differ: {q.vector.shape} vs {d.vector.shape}"
        )
    return float(q.vector @ d.vector)
