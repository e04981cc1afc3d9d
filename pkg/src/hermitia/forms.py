"""Left-invariant differential forms on a Lie algebra.

A k-form is stored by its coefficients on the basis ``e^I`` for strictly
increasing multi-indices ``I`` in lexicographic order (the order produced by
``itertools.combinations``).  Evaluation follows the determinant convention
``e^I(e_I) = 1``, so ``(a ^ b)(x, y) = a(x) b(y) - a(y) b(x)`` for 1-forms.

Coefficient arrays are real or complex numpy arrays; real forms promote to
complex when combined with complex ones.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .lie_algebra import StructureConstants


@lru_cache(maxsize=None)
def multi_indices(dim: int, k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.combinations(range(dim), k))


@lru_cache(maxsize=None)
def index_of(dim: int, k: int) -> dict[tuple[int, ...], int]:
    return {I: n for n, I in enumerate(multi_indices(dim, k))}


def _merge_sign(I: Sequence[int], J: Sequence[int]) -> int:
    inversions = sum(1 for i in I for j in J if i > j)
    return -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def _wedge_table(dim: int, k: int, l: int):
    ia, ib, io, sg = [], [], [], []
    out_index = index_of(dim, k + l)
    for a, I in enumerate(multi_indices(dim, k)):
        sI = set(I)
        for b, J in enumerate(multi_indices(dim, l)):
            if sI.intersection(J):
                continue
            ia.append(a)
            ib.append(b)
            io.append(out_index[tuple(sorted(I + J))])
            sg.append(_merge_sign(I, J))
    return (np.array(ia, dtype=int), np.array(ib, dtype=int),
            np.array(io, dtype=int), np.array(sg, dtype=float))


@lru_cache(maxsize=None)
def _contract_table(dim: int, k: int):
    # (i_x a)_J = sum_{i not in J} x_i a_{sorted(i,J)} (-1)^{pos of i}
    src, dst, vec, sg = [], [], [], []
    src_index = index_of(dim, k)
    for b, J in enumerate(multi_indices(dim, k - 1)):
        for i in range(dim):
            if i in J:
                continue
            I = tuple(sorted(J + (i,)))
            pos = I.index(i)
            src.append(src_index[I])
            dst.append(b)
            vec.append(i)
            sg.append(-1.0 if pos % 2 else 1.0)
    return (np.array(src, dtype=int), np.array(dst, dtype=int),
            np.array(vec, dtype=int), np.array(sg, dtype=float))


@dataclass(frozen=True, eq=False)
class InvariantForm:
    dim: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs)
        if coeffs.dtype.kind not in "fc":
            coeffs = coeffs.astype(float)
        n = comb(self.dim, self.degree)
        if coeffs.shape != (n,):
            raise ValueError(
                f"degree-{self.degree} form on dim {self.dim} needs {n} coefficients, got {coeffs.shape}")
        coeffs = coeffs.copy()
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, dim: int, degree: int, complex_: bool = False) -> "InvariantForm":
        return cls(dim, degree, np.zeros(comb(dim, degree), dtype=complex if complex_ else float))

    @classmethod
    def basis(cls, dim: int, *indices: int, one_based: bool = True) -> "InvariantForm":
        """The wedge ``e^{i1} ^ ... ^ e^{ik}`` (indices need not be sorted)."""
        off = 1 if one_based else 0
        idx = [i - off for i in indices]
        if len(set(idx)) < len(idx):
            return cls.zero(dim, len(idx))
        order = sorted(range(len(idx)), key=lambda t: idx[t])
        perm_sign = _perm_sign(order)
        out = np.zeros(comb(dim, len(idx)))
        out[index_of(dim, len(idx))[tuple(sorted(idx))]] = perm_sign
        return cls(dim, len(idx), out)

    @classmethod
    def one_form(cls, vec: Sequence[complex]) -> "InvariantForm":
        vec = np.asarray(vec)
        return cls(len(vec), 1, vec)

    @classmethod
    def from_tensor(cls, tensor: np.ndarray) -> "InvariantForm":
        """Restrict a fully antisymmetric array to increasing index tuples."""
        tensor = np.asarray(tensor)
        k = tensor.ndim
        dim = tensor.shape[0] if k else 0
        if k == 0:
            raise ValueError("use a degree-0 form directly for scalars")
        coeffs = np.array([tensor[I] for I in multi_indices(dim, k)])
        return cls(dim, k, coeffs)

    # -- arithmetic ---------------------------------------------------------
    @property
    def is_complex(self) -> bool:
        return self.coeffs.dtype.kind == "c"

    def _check(self, other: "InvariantForm"):
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "InvariantForm") -> "InvariantForm":
        self._check(other)
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")
        return InvariantForm(self.dim, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other: "InvariantForm") -> "InvariantForm":
        return self + (-other)

    def __neg__(self) -> "InvariantForm":
        return InvariantForm(self.dim, self.degree, -self.coeffs)

    def __mul__(self, s: complex) -> "InvariantForm":
        return InvariantForm(self.dim, self.degree, s * self.coeffs)

    __rmul__ = __mul__

    def __truediv__(self, s: complex) -> "InvariantForm":
        return InvariantForm(self.dim, self.degree, self.coeffs / s)

    def __xor__(self, other: "InvariantForm") -> "InvariantForm":
        return wedge(self, other)

    def conj(self) -> "InvariantForm":
        return InvariantForm(self.dim, self.degree, np.conj(self.coeffs))

    @property
    def real(self) -> "InvariantForm":
        return InvariantForm(self.dim, self.degree, np.real(self.coeffs).astype(float))

    @property
    def imag(self) -> "InvariantForm":
        return InvariantForm(self.dim, self.degree, np.imag(self.coeffs).astype(float))

    def max_abs(self) -> float:
        return float(np.abs(self.coeffs).max()) if self.coeffs.size else 0.0

    def allclose(self, other: "InvariantForm", atol: float = 1e-12) -> bool:
        return self.degree == other.degree and bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=0))

    def __getitem__(self, indices: tuple[int, ...]) -> complex:
        """Coefficient of ``e^I`` for a 1-based increasing tuple ``I``."""
        if isinstance(indices, int):
            indices = (indices,)
        return self.coeffs[index_of(self.dim, self.degree)[tuple(i - 1 for i in indices)]]

    # -- evaluation ---------------------------------------------------------
    def to_tensor(self) -> np.ndarray:
        """Fully antisymmetric array ``T[i1..ik] = a(e_i1, ..., e_ik)``."""
        k, dim = self.degree, self.dim
        out = np.zeros((dim,) * k, dtype=self.coeffs.dtype)
        if k == 0:
            return np.array(self.coeffs[0])
        perms = [(p, _perm_sign(p)) for p in itertools.permutations(range(k))]
        for val, I in zip(self.coeffs, multi_indices(dim, k)):
            if val == 0:
                continue
            for p, s in perms:
                out[tuple(I[t] for t in p)] = s * val
        return out

    def __call__(self, *vectors: Sequence[float]) -> complex:
        if len(vectors) != self.degree:
            raise ValueError(f"a {self.degree}-form takes {self.degree} vectors")
        if self.degree == 0:
            return self.coeffs[0]
        V = np.array(vectors, dtype=complex if any(np.iscomplexobj(v) for v in vectors) else float).T
        subs = np.array([V[list(I), :] for I in multi_indices(self.dim, self.degree)])
        val = np.dot(self.coeffs, np.linalg.det(subs))
        return val

    # -- serialisation ------------------------------------------------------
    def to_json(self, tol: float = 0.0) -> dict:
        out = {}
        for val, I in zip(self.coeffs, multi_indices(self.dim, self.degree)):
            if abs(val) > tol:
                out[",".join(str(i + 1) for i in I)] = [float(np.real(val)), float(np.imag(val))]
        return {"dim": self.dim, "degree": self.degree, "coeffs": out}

    @classmethod
    def from_json(cls, obj: dict) -> "InvariantForm":
        dim, k = int(obj["dim"]), int(obj["degree"])
        coeffs = np.zeros(comb(dim, k), dtype=complex)
        idx = index_of(dim, k)
        for key, (re, im) in obj["coeffs"].items():
            I = tuple(int(s) - 1 for s in key.split(",")) if key else ()
            coeffs[idx[I]] = complex(re, im)
        if not np.any(coeffs.imag):
            coeffs = coeffs.real
        return cls(dim, k, coeffs)

    def __repr__(self) -> str:
        terms = []
        for val, I in zip(self.coeffs, multi_indices(self.dim, self.degree)):
            if abs(val) > 1e-14:
                terms.append(f"{val:.6g}*e^{''.join(str(i + 1) for i in I) or '0'}")
        return f"InvariantForm(deg={self.degree}: " + (" + ".join(terms) or "0") + ")"


def _perm_sign(p: Sequence[int]) -> int:
    p = list(p)
    sign = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def scalar(dim: int, value: complex = 1.0) -> InvariantForm:
    return InvariantForm(dim, 0, np.array([value]))


def wedge(a: InvariantForm, b: InvariantForm) -> InvariantForm:
    a._check(b)
    k, l, dim = a.degree, b.degree, a.dim
    dtype = np.result_type(a.coeffs.dtype, b.coeffs.dtype)
    if k + l > dim:
        return InvariantForm(dim, k + l, np.zeros(0, dtype=dtype))
    ia, ib, io, sg = _wedge_table(dim, k, l)
    out = np.zeros(comb(dim, k + l), dtype=dtype)
    np.add.at(out, io, sg * a.coeffs[ia] * b.coeffs[ib])
    return InvariantForm(dim, k + l, out)


def wedge_all(*forms: InvariantForm) -> InvariantForm:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def power(a: InvariantForm, p: int) -> InvariantForm:
    out = scalar(a.dim, 1.0)
    for _ in range(p):
        out = wedge(out, a)
    return out


def contract(a: InvariantForm, x: Sequence[complex]) -> InvariantForm:
    """Interior product ``i_x a`` (insertion into the first slot)."""
    if a.degree < 1:
        raise ValueError("cannot contract a 0-form")
    x = np.asarray(x)
    src, dst, vec, sg = _contract_table(a.dim, a.degree)
    dtype = np.result_type(a.coeffs.dtype, x.dtype)
    out = np.zeros(comb(a.dim, a.degree - 1), dtype=dtype)
    np.add.at(out, dst, sg * x[vec] * a.coeffs[src])
    return InvariantForm(a.dim, a.degree - 1, out)


def lefschetz(omega: InvariantForm, a: InvariantForm, power_: int = 1) -> InvariantForm:
    if power_ < 0:
        raise ValueError("Lefschetz power must be nonnegative")
    out = a
    for _ in range(power_):
        out = wedge(omega, out)
    return out


def derivation_matrix(dim: int, k: int, images: np.ndarray, shift: int) -> np.ndarray:
    """Matrix on degree-k forms of the derivation extending a map on 1-forms.

    Column ``i`` of ``images`` holds the coefficients of the image of ``e^i``,
    a form of degree ``1 + shift``.  Odd derivations (``shift`` odd) pick up
    the usual Koszul sign when moving past earlier factors.
    """
    rows = comb(dim, k + shift)
    mat = np.zeros((rows, comb(dim, k)), dtype=images.dtype)
    if rows == 0 or k == 0:
        return mat
    img = [InvariantForm(dim, 1 + shift, images[:, i]) for i in range(dim)]
    e1 = [InvariantForm.basis(dim, i, one_based=False) for i in range(dim)]
    for col, I in enumerate(multi_indices(dim, k)):
        acc = np.zeros(rows, dtype=images.dtype)
        for s in range(k):
            factors = [e1[i] for i in I]
            factors[s] = img[I[s]]
            acc = acc + (-1) ** (s * shift) * wedge_all(*factors).coeffs
        mat[:, col] = acc
    return mat


def ce_matrix(sc: StructureConstants, k: int) -> np.ndarray:
    """Matrix of the Chevalley-Eilenberg differential on degree-k forms."""
    key = ("d", k)
    if key not in sc._cache:
        dim = sc.dim
        # de^m = -sum_{i<j} c[i,j,m] e^{ij}
        pairs = multi_indices(dim, 2)
        d1 = np.zeros((len(pairs), dim))
        for r, (i, j) in enumerate(pairs):
            d1[r, :] = -sc.c[i, j, :]
        mat = derivation_matrix(dim, k, d1, 1) if k else np.zeros((dim, 1))
        mat.setflags(write=False)
        sc._cache[key] = mat
    return sc._cache[key]


def ce_differential(sc: StructureConstants, a: InvariantForm) -> InvariantForm:
    if a.dim != sc.dim:
        raise ValueError(f"dimension mismatch: form on {a.dim}, algebra of dim {sc.dim}")
    if a.degree >= sc.dim:
        return InvariantForm.zero(sc.dim, a.degree + 1, a.is_complex)
    return InvariantForm(sc.dim, a.degree + 1, ce_matrix(sc, a.degree) @ a.coeffs)

