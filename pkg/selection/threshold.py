"""
Knockoff+ threshold on the W statistics.
"""

from typing import FrozenSet, Tuple

import numpy as np

from errors import DomainError


def knockoff_threshold(W: np.ndarray, q: float) -> Tuple[float, FrozenSet[int]]:
    """
    tau = min{ t in {|W_j| : W_j != 0} : (1 + #{W_j <= -t}) / max(1, #{W_j >= t}) <= q }.
    Returns (tau, {j : W_j >= tau}); tau is +inf and the set empty when no t qualifies.
    """
    if not 0.0 < q < 1.0:
        raise DomainError(f"FDR level q must lie in (0, 1), got {q}")
    W = np.asarray(W, dtype=float)
    if not np.isfinite(W).all():
        raise DomainError("W statistics must be finite")

    candidates = np.unique(np.abs(W[W != 0.0]))
    if candidates.size == 0:
        return np.inf, frozenset()
    numerator = 1 + (W[None, :] <= -candidates[:, None]).sum(axis=1)
    denominator = np.maximum(1, (W[None, :] >= candidates[:, None]).sum(axis=1))
    admissible = numerator / denominator <= q
    if not admissible.any():
        return np.inf, frozenset()
    tau = float(candidates[np.argmax(admissible)])
    return tau, frozenset(int(j) for j in np.flatnonzero(W >= tau))
