"""Dense linear algebra over GF(2) on numpy uint8 arrays."""

from __future__ import annotations

import numpy as np


def rref(m: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    a = (np.array(m, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.nonzero(a[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        mask = a[:, c].astype(bool)
        mask[r] = False
        a[mask] ^= a[r]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def nullspace(m: np.ndarray, ncols: int | None = None) -> np.ndarray:
    """Basis (as rows) of {x : m x = 0}."""
    m = np.asarray(m, dtype=np.uint8)
    if ncols is None:
        ncols = m.shape[1]
    if m.size == 0:
        return np.eye(ncols, dtype=np.uint8)
    red, pivots = rref(m)
    free = [c for c in range(ncols) if c not in pivots]
    basis = np.zeros((len(free), ncols), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, p in enumerate(pivots):
            basis[i, p] = red[row, f]
    return basis


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """One solution of a x = b (free variables set to 0), or None."""
    a = np.asarray(a, dtype=np.uint8)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.zeros(n, dtype=np.uint8)
    aug = np.concatenate([a, np.asarray(b, dtype=np.uint8).reshape(-1, 1)], axis=1)
    red, pivots = rref(aug)
    if n in pivots:
        return None
    x = np.zeros(n, dtype=np.uint8)
    for row, p in enumerate(pivots):
        x[p] = red[row, n]
    return x
