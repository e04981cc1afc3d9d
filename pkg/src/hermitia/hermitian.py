"""Left-invariant Hermitian structures ``(g, J, omega)`` on a Lie algebra.

Conventions (all fixed here, used everywhere else):

* ``J`` acts on vectors by the matrix ``J`` (column ``j`` is ``J e_j``).
* Fundamental form ``omega(x, y) = g(x, J y)``; so ``g(x, y) = omega(J x, y)``.
* A complex 1-form ``phi`` has type (1,0) iff ``phi(J x) = i phi(x)``.
* ``J`` on 1-forms is ``(J a)(x) = a(J x)``; on (1,0)-forms it is ``i``.  With
  this sign a Vaisman form satisfies ``omega = (theta^Jtheta - dJtheta)/|theta|^2``.
* ``d^c = i (delbar - del)``, which equals ``-d(.)(J., J., J.)`` on 2-forms
  of type (1,1); the Bismut torsion 3-form is ``d^c omega``.
* Orientation is ``omega^n / n!``; the Hodge star uses it.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial
from typing import Sequence

import numpy as np

from .forms import (InvariantForm, ce_differential, derivation_matrix, index_of,
                    multi_indices, power, wedge)
from .lie_algebra import DEFAULT_TOL, StructureConstants


class StructureError(ValueError):
    """Input data does not define a (integrable) Hermitian structure."""


@dataclass(frozen=True)
class LeeData:
    theta: InvariantForm
    eta: InvariantForm
    norm2: float
    residual: float


class HermitianStructure:
    def __init__(self, sc: StructureConstants, J, g=None, tol: float = 1e-8):
        dim = sc.dim
        J = np.array(J, dtype=float)
        g = np.eye(dim) if g is None else np.array(g, dtype=float)
        if J.shape != (dim, dim) or g.shape != (dim, dim):
            raise StructureError(f"J and g must be {dim}x{dim}")
        if np.abs(J @ J + np.eye(dim)).max() > tol:
            raise StructureError("J^2 != -Id")
        if np.abs(g - g.T).max() > tol:
            raise StructureError("g is not symmetric")
        g = 0.5 * (g + g.T)
        if np.linalg.eigvalsh(g).min() <= 0:
            raise StructureError("g is not positive definite")
        if np.abs(J.T @ g @ J - g).max() > tol * max(1.0, np.abs(g).max()):
            raise StructureError("g is not J-compatible: g(Jx, Jy) != g(x, y)")
        for arr in (J, g):
            arr.setflags(write=False)
        self.sc = sc
        self.J = J
        self.g = g
        self.dim = dim
        self.n = dim // 2
        self.ginv = np.linalg.inv(g)
        self._proj_cache: dict = {}
        self._gram_cache: dict = {}
        self.frame = orthonormal_frame(g)
        self.omega = InvariantForm.from_tensor(g @ J)
        vol = power(self.omega, self.n) / factorial(self.n)
        self.volume = vol
        self.orientation = float(np.sign(vol.coeffs[0]))

    def __repr__(self) -> str:
        return f"HermitianStructure(dim={self.dim}, {self.sc!r})"

    # -- basic tensors -------------------------------------------------------
    def inner(self, x, y) -> float:
        return float(np.asarray(x) @ self.g @ np.asarray(y))

    def flat(self, x) -> np.ndarray:
        """Metric dual 1-form coefficients of a vector."""
        return self.g @ np.asarray(x)

    def sharp(self, a: InvariantForm) -> np.ndarray:
        return self.ginv @ a.coeffs

    def J_form(self, a: InvariantForm) -> InvariantForm:
        """``(J a)(x) = a(J x)`` on 1-forms."""
        if a.degree != 1:
            raise ValueError("J_form acts on 1-forms")
        return InvariantForm(self.dim, 1, self.J.T @ a.coeffs)

    def with_metric(self, g) -> "HermitianStructure":
        return HermitianStructure(self.sc, self.J, g)

    def with_omega(self, omega: InvariantForm) -> "HermitianStructure":
        return HermitianStructure(self.sc, self.J, metric_from_omega(self.J, omega))

    # -- integrability -------------------------------------------------------
    def nijenhuis_tensor(self) -> np.ndarray:
        """``N[i, j, :] = N(e_i, e_j)``."""
        c, J = self.sc.c, self.J

        def br(X, Y):  # X, Y are matrices whose columns are vectors
            return np.einsum("ai,bj,abk->ijk", X, Y, c)

        I = np.eye(self.dim)
        N = br(J, J) - np.einsum("kl,ijl->ijk", J, br(J, I)) - np.einsum("kl,ijl->ijk", J, br(I, J)) - br(I, I)
        return N

    def nijenhuis_residual(self) -> float:
        return float(np.abs(self.nijenhuis_tensor()).max())

    def is_integrable(self, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
        r = self.nijenhuis_residual()
        return r <= tol, r

    # -- bidegrees -------------------------------------------------------------
    def _type_projectors(self, k: int) -> dict[tuple[int, int], np.ndarray]:
        if k not in self._proj_cache:
            dim = self.dim
            # derivation a -> a(J., ...) has eigenvalue i(p - q) on (p,q)-forms
            D = derivation_matrix(dim, k, self.J.T.astype(complex), 0) if k else np.zeros((1, 1), complex)
            size = comb(dim, k)
            eye = np.eye(size, dtype=complex)
            projs = {}
            for p in range(max(0, k - self.n), min(k, self.n) + 1):
                q = k - p
                P = eye.copy()
                for p2 in range(max(0, k - self.n), min(k, self.n) + 1):
                    if p2 == p:
                        continue
                    m, m2 = p - q, p2 - (k - p2)
                    P = P @ (D - 1j * m2 * eye) / (1j * (m - m2))
                projs[(p, q)] = P
            self._proj_cache[k] = projs
        return self._proj_cache[k]

    def bidegree_project(self, a: InvariantForm, p: int, q: int) -> InvariantForm:
        if p < 0 or q < 0:
            raise ValueError("bidegree must be nonnegative")
        if p + q != a.degree:
            raise ValueError(f"bidegree ({p},{q}) incompatible with degree {a.degree}")
        projs = self._type_projectors(a.degree)
        if (p, q) not in projs:
            return InvariantForm.zero(self.dim, a.degree, True)
        return InvariantForm(self.dim, a.degree, projs[(p, q)] @ a.coeffs)

    def bidegree_parts(self, a: InvariantForm) -> dict[tuple[int, int], InvariantForm]:
        return {pq: InvariantForm(self.dim, a.degree, P @ a.coeffs)
                for pq, P in self._type_projectors(a.degree).items()}

    def d(self, a: InvariantForm) -> InvariantForm:
        return ce_differential(self.sc, a)

    def del_(self, a: InvariantForm) -> InvariantForm:
        """``del a``: the (p+1, q)-part of ``d`` applied to each (p,q)-part."""
        out = InvariantForm.zero(self.dim, a.degree + 1, True)
        for (p, q), part in self.bidegree_parts(a).items():
            if part.max_abs() == 0:
                continue
            out = out + self.bidegree_project(self.d(part), p + 1, q)
        return out

    def delbar(self, a: InvariantForm) -> InvariantForm:
        out = InvariantForm.zero(self.dim, a.degree + 1, True)
        for (p, q), part in self.bidegree_parts(a).items():
            if part.max_abs() == 0:
                continue
            out = out + self.bidegree_project(self.d(part), p, q + 1)
        return out

    def dc(self, a: InvariantForm) -> InvariantForm:
        """``d^c a = i (delbar - del) a``; real for real ``a`` when J is integrable."""
        out = 1j * (self.delbar(a) - self.del_(a))
        if not a.is_complex:
            return out.real
        return out

    def eval_J(self, a: InvariantForm) -> InvariantForm:
        """``a(J., ..., J.)`` for a form of any degree."""
        if a.degree == 0:
            return a
        T = a.to_tensor()
        for axis in range(a.degree):
            T = np.moveaxis(np.tensordot(T, self.J, axes=([axis], [0])), -1, axis)
        return InvariantForm.from_tensor(T)

    # -- metric on forms -----------------------------------------------------
    def gram(self, k: int) -> np.ndarray:
        """Gram matrix of the induced inner product on the basis ``e^I``."""
        if k not in self._gram_cache:
            idx = multi_indices(self.dim, k)
            if k == 0:
                G = np.ones((1, 1))
            else:
                G = np.empty((len(idx), len(idx)))
                for a, I in enumerate(idx):
                    for b, K in enumerate(idx):
                        G[a, b] = np.linalg.det(self.ginv[np.ix_(I, K)])
            self._gram_cache[k] = G
        return self._gram_cache[k]

    def form_inner(self, a: InvariantForm, b: InvariantForm) -> complex:
        return complex(np.conj(a.coeffs) @ self.gram(a.degree) @ b.coeffs)

    def form_norm(self, a: InvariantForm) -> float:
        return float(np.sqrt(max(self.form_inner(a, a).real, 0.0)))

    def hodge_star(self, a: InvariantForm) -> InvariantForm:
        """Defined by ``b ^ *a = <b, a> vol`` for all real ``b``."""
        dim, k = self.dim, a.degree
        comp = multi_indices(dim, dim - k)
        cidx = index_of(dim, dim - k)
        full = tuple(range(dim))
        # W maps *-coefficients to the pairing e^I ^ e^K against the top form
        W = np.zeros((comb(dim, k), comb(dim, dim - k)))
        for r, I in enumerate(multi_indices(dim, k)):
            K = tuple(i for i in full if i not in I)
            W[r, cidx[K]] = _shuffle_sign(I, K)
        vol0 = self.volume.coeffs[0]
        coeffs = np.linalg.solve(W, vol0 * (self.gram(k) @ a.coeffs))
        return InvariantForm(dim, dim - k, coeffs)

    # -- Lee form ------------------------------------------------------------
    def lee_form(self) -> LeeData:
        if self.n < 2:
            raise ValueError("the Lee form needs complex dimension >= 2")
        wn1 = power(self.omega, self.n - 1)
        rhs = self.d(wn1).coeffs
        cols = [wedge(InvariantForm.basis(self.dim, i, one_based=False), wn1).coeffs for i in range(self.dim)]
        L = np.array(cols).T
        theta, *_ = np.linalg.lstsq(L, rhs, rcond=None)
        if np.linalg.matrix_rank(L) < self.dim:
            raise np.linalg.LinAlgError("Lefschetz map on 1-forms is singular")
        residual = float(np.abs(L @ theta - rhs).max()) if rhs.size else 0.0
        theta_f = InvariantForm(self.dim, 1, theta)
        eta = self.bidegree_project(theta_f, 1, 0)
        return LeeData(theta_f, eta, self.form_norm(theta_f) ** 2, residual)

    # -- complex coframe -----------------------------------------------------
    def holomorphic_coframe(self) -> np.ndarray:
        """Rows are a basis of (1,0)-forms (``phi(J x) = i phi(x)``)."""
        w, V = np.linalg.eig(self.J.T)
        rows = V[:, np.isclose(w, 1j)].T
        return rows


def _shuffle_sign(I, K) -> int:
    inv = sum(1 for i in I for k in K if i > k)
    return -1 if inv % 2 else 1


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Gram-Schmidt of the defining basis w.r.t. ``g``; columns are the frame."""
    dim = g.shape[0]
    E = np.eye(dim)
    for _ in range(2):  # second pass re-orthonormalises
        for i in range(dim):
            v = E[:, i].copy()
            for j in range(i):
                v -= (E[:, j] @ g @ v) * E[:, j]
            E[:, i] = v / np.sqrt(v @ g @ v)
    return E


def metric_from_omega(J: np.ndarray, omega: InvariantForm) -> np.ndarray:
    """Recover ``g(x, y) = omega(J x, y)`` from a real (1,1)-form."""
    W = np.real(omega.to_tensor())
    return J.T @ W


def omega_matrix(g: np.ndarray, J: np.ndarray) -> np.ndarray:
    return g @ J
