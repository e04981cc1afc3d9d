"""Levi-Civita, Bismut and Chern connections of left-invariant structures.

``Gamma[i, j, k]`` is the ``e_k`` component of ``nabla_{e_i} e_j``.  Tensors
are indexed in the defining basis; covariant 4-tensors follow
``R[i, j, k, l] = g(R(e_i, e_j) e_k, e_l)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .forms import InvariantForm, ce_differential
from .hermitian import HermitianStructure, StructureError
from .lie_algebra import DEFAULT_TOL


class Kind(str, Enum):
    LEVI_CIVITA = "levi-civita"
    BISMUT = "bismut"
    CHERN = "chern"


@dataclass(frozen=True, eq=False)
class ConnectionCoefficients:
    kind: Kind
    gamma: np.ndarray

    def covariant(self, i: int, vec: np.ndarray) -> np.ndarray:
        """``nabla_{e_i}`` applied to a left-invariant vector field."""
        return np.asarray(vec) @ self.gamma[i]

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "gamma": self.gamma.tolist()}


def _raise(H: HermitianStructure, lowered: np.ndarray) -> np.ndarray:
    # lowered[i, j, l] = g(nabla_i e_j, e_l)  ->  Gamma[i, j, k]
    return np.einsum("ijl,lk->ijk", lowered, H.ginv)


def _lowered_brackets(H: HermitianStructure) -> np.ndarray:
    # B[i, j, l] = g([e_i, e_j], e_l)
    return np.einsum("ijk,kl->ijl", H.sc.c, H.g)


def levi_civita(H: HermitianStructure) -> ConnectionCoefficients:
    """Koszul: ``2g(nabla_x y, z) = g([x,y],z) - g([y,z],x) + g([z,x],y)``."""
    B = _lowered_brackets(H)
    lowered = 0.5 * (B - np.einsum("jli->ijl", B)
                     + np.einsum("lij->ijl", B))
    return ConnectionCoefficients(Kind.LEVI_CIVITA, _raise(H, lowered))


def _require_integrable(H: HermitianStructure, tol: float):
    ok, res = H.is_integrable(tol)
    if not ok:
        raise StructureError(f"J is not integrable (Nijenhuis residual {res:.3g})")


def bismut(H: HermitianStructure, tol: float = DEFAULT_TOL) -> ConnectionCoefficients:
    """Bismut connection from brackets, metric and complex structure.

    ``2g(nabla_x y, z) = g([x,y] - [Jx,Jy], z) - g([x,z] - [Jx,Jz], y)
    - g([y,z] + [Jy,Jz], x)``.
    """
    _require_integrable(H, tol)
    B = _lowered_brackets(H)
    J = H.J
    # BJ[i, j, l] = g([J e_i, J e_j], e_l)
    BJ = np.einsum("ai,bj,abl->ijl", J, J, B)
    t1 = B - BJ                                   # g([x,y]-[Jx,Jy], z)
    t2 = np.einsum("ilj->ijl", B - BJ)            # g([x,z]-[Jx,Jz], y)
    t3 = np.einsum("jli->ijl", B + BJ)            # g([y,z]+[Jy,Jz], x)
    lowered = 0.5 * (t1 - t2 - t3)
    return ConnectionCoefficients(Kind.BISMUT, _raise(H, lowered))


def chern(H: HermitianStructure, tol: float = DEFAULT_TOL) -> ConnectionCoefficients:
    """Chern connection as Levi-Civita plus ``1/2 d omega(Jx, y, z)``."""
    _require_integrable(H, tol)
    lc = levi_civita(H)
    dw = ce_differential(H.sc, H.omega).to_tensor()
    corr = 0.5 * np.einsum("ai,ajl->ijl", H.J, dw)
    lowered = np.einsum("ijk,kl->ijl", lc.gamma, H.g) + corr
    return ConnectionCoefficients(Kind.CHERN, _raise(H, lowered))



def torsion_tensor(H: HermitianStructure, C: ConnectionCoefficients) -> np.ndarray:
    """Vector-valued torsion ``T[i, j, :] = T(e_i, e_j)``."""
    return C.gamma - C.gamma.transpose(1, 0, 2) - H.sc.c


def torsion_lowered(H: HermitianStructure, C: ConnectionCoefficients) -> np.ndarray:
    return np.einsum("ijk,kl->ijl", torsion_tensor(H, C), H.g)


def torsion_3form(H: HermitianStructure, C: ConnectionCoefficients, tol: float = 1e-9) -> InvariantForm:
    if C.kind is not Kind.BISMUT:
        raise ValueError("only the Bismut torsion is guaranteed totally skew")
    T = torsion_lowered(H, C)
    skew = max(np.abs(T + T.transpose(0, 2, 1)).max(), np.abs(T + T.transpose(2, 1, 0)).max())
    if skew > tol * max(1.0, np.abs(T).max()):
        raise ValueError(f"Bismut torsion is not totally skew (defect {skew:.3g}); convention bug")
    return InvariantForm.from_tensor(T)


def nabla_tensor(C: ConnectionCoefficients, T: np.ndarray) -> np.ndarray:
    """Covariant derivative of a covariant tensor: result ``[u, i1, ..., ik]``."""
    k = T.ndim
    out = np.zeros((C.gamma.shape[0],) + T.shape, dtype=T.dtype)
    for s in range(k):
        # -T(..., nabla_u e_{i_s}, ...) = -sum_m Gamma[u, i_s, m] T[..., m, ...]
        moved = np.moveaxis(T, s, 0)                       # [m, rest...]
        contrib = np.tensordot(C.gamma, moved, axes=([2], [0]))  # [u, i_s, rest...]
        out -= np.moveaxis(contrib, 1, s + 1)
    return out


def nabla_form(H: HermitianStructure, C: ConnectionCoefficients, a: InvariantForm) -> np.ndarray:
    if a.degree == 0:
        return np.zeros(H.dim, dtype=a.coeffs.dtype)
    return nabla_tensor(C, a.to_tensor())


def curvature_endo(H: HermitianStructure, C: ConnectionCoefficients) -> np.ndarray:
    """``Rv[i, j, k, :] = R(e_i, e_j) e_k``."""
    G, c = C.gamma, H.sc.c
    # nabla_i nabla_j e_k = sum_m G[j,k,m] G[i,m,:]
    nn = np.einsum("jkm,imp->ijkp", G, G)
    return nn - nn.transpose(1, 0, 2, 3) - np.einsum("ijm,mkp->ijkp", c, G)


def curvature(H: HermitianStructure, C: ConnectionCoefficients) -> np.ndarray:
    return np.einsum("ijkp,pl->ijkl", curvature_endo(H, C), H.g)


def ricci_form(H: HermitianStructure, C: ConnectionCoefficients, R: np.ndarray | None = None
               ) -> tuple[InvariantForm, float]:
    """``rho(x, y) = 1/2 sum_i R(x, y, e_i, J e_i)`` and ``b = sum_i rho(J e_i, e_i)``.

    Sums run over the cached orthonormal frame.
    """
    if C.kind is Kind.LEVI_CIVITA:
        raise ValueError("Ricci forms are defined for Hermitian connections")
    R = curvature(H, C) if R is None else R
    E = H.frame
    JE = H.J @ E
    rho = 0.5 * np.einsum("xyab,ai,bi->xy", R, E, JE)
    b = float(np.einsum("ab,ai,bi->", rho, JE, E))
    return InvariantForm.from_tensor(rho), b


def riemannian_scalar(H: HermitianStructure, lc: ConnectionCoefficients | None = None) -> float:
    lc = levi_civita(H) if lc is None else lc
    R = curvature(H, lc)
    # Ric(y, z) = sum_i R(e_i, y, z, e_i); s = trace
    ric = np.einsum("iyzj,ij->yz", R, H.ginv)
    return float(np.einsum("yz,yz->", ric, H.ginv))


def ricci_identity_residual(H: HermitianStructure) -> float:
    """Max-norm defect of ``(rho^B)^{1,1} = rho^Ch + (dJtheta + J dJtheta)/2``, ``J`` acting by pullback."""
    rho_b, _ = ricci_form(H, bismut(H))
    rho_c, _ = ricci_form(H, chern(H))
    theta = H.lee_form().theta.real
    dJt = H.d(H.J_form(theta))
    return (H.bidegree_project(rho_b, 1, 1) - rho_c - 0.5 * (dJt + H.eval_J(dJt))).max_abs()
