"""Finite-dimensional real Lie algebras given by structure constants.

The bracket convention is ``[e_i, e_j] = sum_k c[i, j, k] e_k`` with 0-based
indices internally.  The on-disk JSON format uses 1-based indices.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9


class StructureConstants:
    """Structure constants of a real Lie algebra of even dimension.

    The array ``c`` is stored antisymmetrised in its first two slots and is
    read-only.  Per-algebra caches (e.g. the Chevalley-Eilenberg matrices used
    by :mod:`hermitia.forms`) live in ``_cache`` and never change the value.
    """

    def __init__(self, c: np.ndarray):
        c = np.array(c, dtype=float)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]):
            raise ValueError(f"structure constants must be an N x N x N array, got {c.shape}")
        dim = c.shape[0]
        if dim < 2 or dim % 2:
            raise ValueError(f"dimension must be even and >= 2, got {dim}")
        asym = np.abs(c + c.transpose(1, 0, 2)).max()
        if asym > 1e-12:
            raise ValueError(f"structure constants are not antisymmetric (defect {asym:.3g})")
        c.setflags(write=False)
        self.c = c
        self.dim = dim
        self._cache: dict = {}

    def __repr__(self) -> str:
        nnz = int(np.count_nonzero(np.triu(np.abs(self.c).sum(axis=2), 1)))
        return f"StructureConstants(dim={self.dim}, nonzero brackets={nnz})"

    def bracket(self, x: Sequence[float], y: Sequence[float]) -> np.ndarray:
        return np.einsum("i,j,ijk->k", np.asarray(x), np.asarray(y), self.c)

    def basis_bracket(self, i: int, j: int) -> np.ndarray:
        return self.c[i, j].copy()

    def sparse_brackets(self, tol: float = 0.0) -> list[tuple[int, int, int, float]]:
        """Nonzero ``(i, j, k, value)`` entries with ``i < j``, 1-based."""
        out = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for k in range(self.dim):
                    val = float(self.c[i, j, k])
                    if abs(val) > tol:
                        out.append((i + 1, j + 1, k + 1, val))
        return out

    def to_json(self) -> dict:
        return {"dim": self.dim, "brackets": [list(b) for b in self.sparse_brackets()]}

    @classmethod
    def from_json(cls, obj: dict | str | Path) -> "StructureConstants":
        if isinstance(obj, (str, Path)):
            obj = json.loads(Path(obj).read_text())
        return new_algebra(int(obj["dim"]), [tuple(b) for b in obj.get("brackets", [])], one_based=True)


def new_algebra(
    dim: int,
    brackets: Iterable[tuple[int, int, int, float]],
    one_based: bool = True,
) -> StructureConstants:
    """Build structure constants from a sparse list of ``(i, j, k, value)``.

    Each entry sets ``[e_i, e_j]`` to have ``value`` along ``e_k``; the
    antisymmetric partner ``[e_j, e_i]`` is filled in automatically.
    """
    if dim < 2 or dim % 2:
        raise ValueError(f"dimension must be even and >= 2, got {dim}")
    c = np.zeros((dim, dim, dim))
    seen: set[tuple[int, int, int]] = set()
    off = 1 if one_based else 0
    for entry in brackets:
        i, j, k, val = entry
        i, j, k = int(i) - off, int(j) - off, int(k) - off
        for idx in (i, j, k):
            if not 0 <= idx < dim:
                raise IndexError(f"bracket index {idx + off} out of range for dim {dim}")
        if i == j:
            if val != 0:
                raise ValueError(f"[e_{i + off}, e_{i + off}] must vanish")
            continue
        key = (min(i, j), max(i, j), k)
        if key in seen:
            raise ValueError(f"duplicate bracket entry for {(i + off, j + off, k + off)}")
        seen.add(key)
        c[i, j, k] = val
        c[j, i, k] = -val
    return StructureConstants(c)


def abelian(dim: int) -> StructureConstants:
    return new_algebra(dim, [])


def jacobi_residual(sc: StructureConstants) -> float:
    """Max-norm of ``[[e_i,e_j],e_k] + cyclic`` over all basis triples."""
    c = sc.c
    # [[e_i,e_j],e_k]_m = sum_l c[i,j,l] c[l,k,m]
    t = np.einsum("ijl,lkm->ijkm", c, c)
    jac = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
    return float(np.abs(jac).max()) if jac.size else 0.0


def ad(sc: StructureConstants, x: Sequence[float]) -> np.ndarray:
    """Matrix of ``y -> [x, y]`` (columns are images of basis vectors)."""
    # column j is [x, e_j] = sum_i x_i c[i, j, :]
    return np.einsum("i,ijk->kj", np.asarray(x, dtype=float), sc.c)


def is_unimodular(sc: StructureConstants, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    traces = np.einsum("ijj->i", sc.c)
    res = float(np.abs(traces).max())
    return res <= tol, res
