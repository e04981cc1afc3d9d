"""Residual-based predicates for metric classes and falsification gates."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .connections import (bismut, curvature, levi_civita, nabla_form, nabla_tensor, ricci_form,
                          torsion_3form)
from .forms import InvariantForm, power, wedge
from .hermitian import HermitianStructure
from .lie_algebra import DEFAULT_TOL, StructureConstants

GATE_RATIO = 10.0


def tensor_norm(H: HermitianStructure, T: np.ndarray) -> float:
    """Frobenius norm of a covariant tensor evaluated on the orthonormal frame."""
    E = H.frame
    for axis in range(T.ndim):
        T = np.moveaxis(np.tensordot(T, E, axes=([axis], [0])), -1, axis)
    return float(np.sqrt(np.sum(np.abs(T) ** 2)))


def _maxabs(T: np.ndarray) -> float:
    return float(np.abs(T).max()) if T.size else 0.0


def cyclic_sum(T: np.ndarray) -> np.ndarray:
    """``T(x,y,z,...) + T(y,z,x,...) + T(z,x,y,...)`` over the first three slots."""
    return T + np.moveaxis(T, (0, 1, 2), (2, 0, 1)) + np.moveaxis(T, (0, 1, 2), (1, 2, 0))


# -- individual residuals -------------------------------------------------------

def skt_residual(H: HermitianStructure) -> float:
    return H.form_norm(H.d(H.dc(H.omega)))


def gauduchon_residuals(H: HermitianStructure, k: int = 1) -> tuple[float, float, float]:
    """``(||dd^c omega^{n-1}||, ||del delbar(omega^k) ^ omega^{n-k-1}||, ||del delbar omega^{n-2}||)``."""
    n = H.n
    if not 1 <= k <= max(n - 1, 1):
        raise ValueError(f"k must lie in [1, n-1] = [1, {n - 1}]")
    gaud = H.form_norm(H.d(H.dc(power(H.omega, n - 1))))
    kth = H.form_norm(wedge(H.del_(H.delbar(power(H.omega, k))), power(H.omega, n - k - 1)))
    astheno = H.form_norm(H.del_(H.delbar(power(H.omega, n - 2)))) if n >= 2 else 0.0
    return gaud, kth, astheno


def lck_vaisman_residuals(H: HermitianStructure) -> tuple[float, float]:
    lee = H.lee_form()
    theta = lee.theta
    lck = H.form_norm(H.d(H.omega) - wedge(theta, H.omega) / (H.n - 1)) + H.form_norm(H.d(theta))
    grad = nabla_form(H, levi_civita(H), theta)
    return lck, lck + tensor_norm(H, grad)


@dataclass(frozen=True)
class LeePotential:
    c: complex
    residual: float
    normalized: float
    eta_norm: float
    note: str = ""

    @property
    def defined(self) -> bool:
        """False when eta vanishes and no ``c`` can be fitted."""
        return not self.note


def lee_potential_check(H: HermitianStructure, eta_tol: float = 1e-10) -> LeePotential:
    """Best ``c`` in ``del omega = c eta ^ del conj(eta)`` and the remaining defect.

    ``residual`` is ``||del omega - c eta^del(eta-bar)|| + ||del eta||``;
    ``normalized`` divides the two terms by ``||del omega||`` and ``||eta||``.
    """
    eta = H.lee_form().eta
    eta_norm = H.form_norm(eta)
    if eta_norm <= eta_tol:
        return LeePotential(0j, float("inf"), float("inf"), eta_norm, "not LP: eta = 0")
    dw = H.del_(H.omega)
    target = wedge(eta, H.del_(eta.conj()))
    G = H.gram(3)
    tt = np.real(np.conj(target.coeffs) @ G @ target.coeffs)
    c = complex(np.conj(target.coeffs) @ G @ dw.coeffs / tt) if tt > 0 else 0j
    defect = H.form_norm(dw - c * target)
    d_eta = H.form_norm(H.del_(eta))
    dw_norm = H.form_norm(dw)
    normalized = (defect / dw_norm if dw_norm > 0 else defect) + d_eta / eta_norm
    note = ""
    if abs(c) <= eta_tol and dw_norm > eta_tol:
        note = "not LP: best constant c is zero"
    return LeePotential(c, defect + d_eta, normalized, eta_norm, note)


def kahler_like_residuals(H: HermitianStructure, R: np.ndarray | None = None) -> tuple[float, float]:
    """Max-norm defects of the first Bianchi identity and of ``R(Jx,Jy,.,.) = R(x,y,.,.)``."""
    R = curvature(H, bismut(H)) if R is None else R
    J = H.J
    RJ = np.einsum("ai,bj,abkl->ijkl", J, J, R)
    return _maxabs(cyclic_sum(R)), _maxabs(R - RJ)


def symmetry13_residual(H: HermitianStructure, R: np.ndarray | None = None) -> float:
    R = curvature(H, bismut(H)) if R is None else R
    return _maxabs(R - R.transpose(2, 1, 0, 3))


# -- Ivanov-Papadopoulos type identities ---------------------------------------

def torsion_identities(H: HermitianStructure) -> tuple[float, float]:
    """Max-norm residuals of the two identities linking ``dT``, ``nabla T`` and ``sigma R``.

    ``dT(x,y,z,u) = sigma{(nabla_x T)(y,z,u) + 2 g(T(x,y), T(z,u))} - (nabla_u T)(x,y,z)``
    ``sigma R(x,y,z,u) = dT(x,y,z,u) + (nabla_u T)(x,y,z) - sigma g(T(x,y), T(z,u))``
    """
    B = bismut(H)
    T3 = torsion_3form(H, B)
    T = T3.to_tensor()
    dT = H.d(T3).to_tensor()
    NT = nabla_tensor(B, T)                       # [u, x, y, z]
    Tv = np.einsum("xyl,lk->xyk", T, H.ginv)      # vector-valued T(x, y)
    P = np.einsum("xya,ab,zub->xyzu", Tv, H.g, Tv)
    nab_u = np.transpose(NT, (1, 2, 3, 0))        # (nabla_u T)(x,y,z) as [x,y,z,u]
    r20 = dT - (cyclic_sum(NT + 2 * P) - nab_u)
    R = curvature(H, B)
    r21 = cyclic_sum(R) - (dT + nab_u - cyclic_sum(P))
    return _maxabs(r20), _maxabs(r21)


# -- report --------------------------------------------------------------------

RESIDUAL_NAMES = ("skt", "gauduchon", "kth_gauduchon", "astheno", "lck", "vaisman", "lee_potential",
                  "bianchi", "j_invariance", "kahler_like", "symmetry13", "parallel_torsion_B",
                  "parallel_torsion_LC", "bismut_flat", "kahler")


@dataclass
class TheoremCheck:
    name: str
    hypotheses: dict[str, float]
    conclusions: dict[str, float]
    status: str          # "confirmed", "vacuous" or "FALSIFIED"


@dataclass
class ClassificationReport:
    residuals: dict[str, float]
    tol: float
    extras: dict[str, float] = field(default_factory=dict)
    theorems: list[TheoremCheck] = field(default_factory=list)

    @property
    def verdicts(self) -> dict[str, bool]:
        return {k: bool(v <= self.tol) for k, v in self.residuals.items()}

    @property
    def falsified(self) -> list[TheoremCheck]:
        return [t for t in self.theorems if t.status == "FALSIFIED"]

    def to_json(self) -> dict:
        def clean(x):
            return None if not np.isfinite(x) else float(x)
        return {
            "tol": self.tol,
            "residuals": {k: clean(v) for k, v in self.residuals.items()},
            "verdicts": self.verdicts,
            "extras": {k: clean(v) for k, v in self.extras.items()},
            "theorems": [{**asdict(t), "hypotheses": {k: clean(v) for k, v in t.hypotheses.items()},
                          "conclusions": {k: clean(v) for k, v in t.conclusions.items()}}
                         for t in self.theorems],
            "falsified": [t.name for t in self.falsified],
        }

    def table(self) -> str:
        lines = [f"{'class':<22}{'residual':>14}  verdict"]
        for k, v in self.residuals.items():
            lines.append(f"{k:<22}{v:>14.3e}  {'yes' if v <= self.tol else 'no'}")
        if self.theorems:
            lines.append("")
            for t in self.theorems:
                lines.append(f"{t.name:<40}{t.status}")
        return "\n".join(lines)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def classify(H: HermitianStructure, tol: float = DEFAULT_TOL, k: int = 1) -> ClassificationReport:
    lc = levi_civita(H)
    B = bismut(H)
    RB = curvature(H, B)
    T3 = torsion_3form(H, B)
    T = T3.to_tensor()
    gaud, kth, astheno = gauduchon_residuals(H, k) if H.n >= 2 else (0.0, 0.0, 0.0)
    lck, vaisman = lck_vaisman_residuals(H) if H.n >= 2 else (0.0, 0.0)
    lp = lee_potential_check(H) if H.n >= 2 else None
    bianchi, j_inv = kahler_like_residuals(H, RB)
    res = {
        "skt": skt_residual(H),
        "gauduchon": gaud,
        "kth_gauduchon": kth,
        "astheno": astheno,
        "lck": lck,
        "vaisman": vaisman,
        "lee_potential": lp.normalized if lp is not None else float("inf"),
        "bianchi": bianchi,
        "j_invariance": j_inv,
        "kahler_like": max(bianchi, j_inv),
        "symmetry13": symmetry13_residual(H, RB),
        "parallel_torsion_B": _maxabs(nabla_tensor(B, T)),
        "parallel_torsion_LC": _maxabs(nabla_tensor(lc, T)),
        "bismut_flat": _maxabs(RB),
        "kahler": H.form_norm(H.d(H.omega)),
    }
    extras = {}
    if H.n >= 2:
        theta = H.lee_form().theta
        extras["dtheta"] = H.form_norm(H.d(theta))
        extras["ddc_theta"] = H.form_norm(H.d(H.dc(theta)))
    rho, _ = ricci_form(H, B, RB)
    extras["d_rhoB11"] = H.form_norm(H.d(H.bidegree_project(rho, 1, 1)))
    r20, r21 = torsion_identities(H)
    extras["identity_dT"] = r20
    extras["identity_sigmaR"] = r21
    report = ClassificationReport(res, tol, extras)
    report.theorems = theorem_checks(report, H.n)
    return report


def _implication(name, hyps: dict, concls: dict, tol: float) -> TheoremCheck:
    if not all(v <= tol for v in hyps.values()):
        return TheoremCheck(name, hyps, concls, "vacuous")
    ok = all(v <= GATE_RATIO * tol for v in concls.values())
    return TheoremCheck(name, hyps, concls, "confirmed" if ok else "FALSIFIED")


def _equivalence(name, hyps: dict, left: float, right: float, tol: float) -> TheoremCheck:
    concl = {"left": left, "right": right}
    if not all(v <= tol for v in hyps.values()):
        return TheoremCheck(name, hyps, concl, "vacuous")
    # falsified when one side holds within tol and the other fails by more than the gate ratio
    bad = (left <= tol and right > GATE_RATIO * tol) or (right <= tol and left > GATE_RATIO * tol)
    return TheoremCheck(name, hyps, concl, "FALSIFIED" if bad else "confirmed")


def theorem_checks(report: ClassificationReport, n: int) -> list[TheoremCheck]:
    r, tol, x = report.residuals, report.tol, report.extras
    checks = [
        _implication("skt+bianchi => nabla^B T^B = 0", {"skt": r["skt"], "bianchi": r["bianchi"]},
                     {"parallel_torsion_B": r["parallel_torsion_B"]}, tol),
        _equivalence("nabla^B T^B = 0 => (bianchi <=> skt)", {"parallel_torsion_B": r["parallel_torsion_B"]},
                     r["bianchi"], r["skt"], tol),
        _equivalence("bianchi => (nabla^B T^B = 0 <=> skt)", {"bianchi": r["bianchi"]},
                     r["parallel_torsion_B"], r["skt"], tol),
        _implication("bianchi+skt => nabla^LC T^B = 0", {"skt": r["skt"], "bianchi": r["bianchi"]},
                     {"parallel_torsion_LC": r["parallel_torsion_LC"]}, tol),
        _implication("J-invariance => d(rho^B)^{1,1} = 0", {"j_invariance": r["j_invariance"]},
                     {"d_rhoB11": x["d_rhoB11"]}, tol),
    ]
    if n == 2:
        checks += [
            _equivalence("surface: vaisman <=> skt and bianchi", {}, r["vaisman"],
                         max(r["skt"], r["bianchi"]), tol),
            _implication("surface: J-invariance => lck", {"j_invariance": r["j_invariance"]},
                         {"dtheta": x["dtheta"], "ddc_theta": x["ddc_theta"]}, tol),
            _implication("surface: gauduchon+bianchi => vaisman",
                         {"gauduchon": r["gauduchon"], "bianchi": r["bianchi"]}, {"vaisman": r["vaisman"]}, tol),
            _equivalence("surface: skt <=> gauduchon", {}, r["skt"], r["gauduchon"], tol),
        ]
    if n >= 2:
        checks.append(_implication("skt+LP => all kth-Gauduchon and astheno",
                                   {"skt": r["skt"], "lee_potential": r["lee_potential"]},
                                   {"kth_gauduchon": r["kth_gauduchon"], "astheno": r["astheno"]}, tol))
    return checks


# -- SKT feasibility over the invariant cone -----------------------------------

RATIONAL_DENOM = 10**9


def _rationalize(M: np.ndarray, tol: float = 1e-13):
    """Exact rational copy of ``M`` as a sympy matrix, or ``None`` if entries are not plainly rational."""
    import sympy as sp
    M = np.atleast_2d(np.asarray(M, dtype=float))
    out = sp.zeros(*M.shape)
    for idx, x in np.ndenumerate(M):
        q = Fraction(x).limit_denominator(RATIONAL_DENOM)
        if abs(float(q) - x) > tol * max(1.0, abs(x)):
            return None
        out[idx] = sp.Rational(q.numerator, q.denominator)
    return out


def _compound(J, k: int, dim: int):
    """k-th compound of ``J``: row I, column K holds det J[K, I] so that ``a o J = C @ a``."""
    import sympy as sp
    from .forms import multi_indices
    idx = multi_indices(dim, k)
    C = sp.zeros(len(idx), len(idx))
    for r, I in enumerate(idx):
        for s, K in enumerate(idx):
            C[r, s] = J.extract(list(K), list(I)).det()
    return C


@dataclass
class FeasibilityResult:
    feasible: bool
    exact: bool
    slack: float
    witness: InvariantForm | None = None
    certificate: dict | None = None
    note: str = ""

    def to_json(self) -> dict:
        return {"feasible": self.feasible, "exact": self.exact, "slack": self.slack,
                "witness": self.witness.to_json() if self.witness is not None else None,
                "certificate": self.certificate, "note": self.note}


def _invariant_skt_basis(sc: StructureConstants, J: np.ndarray):
    """Exact basis of J-invariant real 2-forms with ``dd^c w = 0`` plus the matching metrics ``J^T W``."""
    import sympy as sp
    from .forms import ce_matrix, multi_indices
    dim = sc.dim
    Jq = _rationalize(J)
    d2 = _rationalize(ce_matrix(sc, 2))
    d3 = _rationalize(ce_matrix(sc, 3))
    if Jq is None or d2 is None or d3 is None:
        return None
    if Jq * Jq != -sp.eye(dim):
        return None
    pairs = multi_indices(dim, 2)
    C2 = _compound(Jq, 2, dim)
    C3 = _compound(Jq, 3, dim)
    inv = (C2 - sp.eye(len(pairs))).nullspace()
    if not inv:
        return sp.zeros(len(pairs), 0), [], pairs
    B = sp.Matrix.hstack(*inv)
    ddc = d3 * (-C3) * d2 * B
    ker = ddc.nullspace()
    basis = sp.Matrix.hstack(*[B * v for v in ker]) if ker else sp.zeros(len(pairs), 0)
    metrics = []
    for col in range(basis.shape[1]):
        W = sp.zeros(dim, dim)
        for r, (a, b) in enumerate(pairs):
            W[a, b] = basis[r, col]
            W[b, a] = -basis[r, col]
        metrics.append(Jq.T * W)
    return basis, metrics, pairs


def _initial_directions(dim: int) -> list[np.ndarray]:
    dirs = []
    I = np.eye(dim, dtype=int)
    dirs.extend(I)
    for i in range(dim):
        for j in range(i + 1, dim):
            dirs.append(I[i] + I[j])
            dirs.append(I[i] - I[j])
    return dirs


def skt_feasibility_invariant(sc: StructureConstants, J: np.ndarray, max_cuts: int = 200,
                              slack_tol: float = 1e-12) -> FeasibilityResult:
    """Decide whether an invariant SKT metric compatible with ``J`` exists.

    The J-invariant dd^c-closed 2-forms are computed exactly over the rationals.
    A cutting-plane LP maximises ``s`` subject to ``u^T g(x) u >= s`` on a growing set
    of integer or rational directions ``u``. A positive optimum gives a witness whose
    rationalisation is certified positive definite exactly. A zero optimum yields dual
    weights ``lambda >= 0`` with ``sum lambda_u u^T G_k u = 0`` for every basis metric
    ``G_k``, checked exactly; since ``sum lambda_u u u^T`` is a nonzero PSD matrix, no
    positive combination of the ``G_k`` exists.
    """
    import sympy as sp
    from scipy.optimize import linprog

    built = _invariant_skt_basis(sc, J)
    if built is None:
        return _skt_feasibility_float(sc, J, max_cuts, slack_tol)
    basis, metrics, pairs = built
    dim = sc.dim
    m = len(metrics)
    if m == 0:
        return FeasibilityResult(False, True, 0.0, None, {"directions": [], "weights": [], "basis_size": 0},
                                 "no J-invariant dd^c-closed 2-forms")
    Gf = np.array([[[float(x) for x in row] for row in G.tolist()] for G in metrics])
    dirs = [np.asarray(u, dtype=object) for u in _initial_directions(dim)]

    def as_float(u):
        return np.array([float(x) for x in u])

    slack = 0.0
    for _ in range(max_cuts):
        U = np.array([as_float(u) for u in dirs])
        Q = np.einsum("su,kuv,sv->sk", U, Gf, U)       # u^T G_k u
        A_ub = np.hstack([-Q, np.ones((len(dirs), 1))])
        res = linprog(np.r_[np.zeros(m), -1.0], A_ub=A_ub, b_ub=np.zeros(len(dirs)),
                      bounds=[(-1, 1)] * m + [(None, 1)], method="highs")
        if res.status != 0:
            raise RuntimeError(f"LP solver failed: {res.message}")
        x, slack = res.x[:m], float(-res.fun)
        if slack <= slack_tol:
            cert = _farkas_certificate(dirs, metrics, -res.ineqlin.marginals)
            if cert is not None:
                return FeasibilityResult(False, True, slack, None, cert,
                                         "no positive-definite combination: exact Farkas certificate")
            return FeasibilityResult(False, False, slack, None, None,
                                     "LP optimum is zero but the dual certificate did not verify exactly")
        g = np.einsum("k,kuv->uv", x, Gf)
        w, V = np.linalg.eigh(g)
        if w[0] > 0:
            xq = [sp.Rational(Fraction(v).limit_denominator(10**6)) for v in x]
            gq = sum((c * G for c, G in zip(xq, metrics)), sp.zeros(dim, dim))
            if gq.is_positive_definite:
                coeffs = sum((c * basis[:, k] for k, c in enumerate(xq)), sp.zeros(len(pairs), 1))
                omega = InvariantForm(dim, 2, np.array([float(v) for v in coeffs], dtype=complex))
                return FeasibilityResult(True, True, slack, omega,
                                         {"coefficients": [str(c) for c in xq], "basis_size": m},
                                         "rational witness verified positive definite exactly")
        # cut along the worst direction, rounded to a rational vector
        u = V[:, 0] / np.abs(V[:, 0]).max()
        dirs.append(np.array([sp.Rational(Fraction(c).limit_denominator(1000)) for c in u], dtype=object))
    return FeasibilityResult(False, False, slack, None, None, "cutting-plane budget exhausted")


def _farkas_certificate(dirs, metrics, weights, tol: float = 1e-9):
    import sympy as sp
    support = [i for i, w in enumerate(weights) if w > tol]
    if not support:
        return None
    # M[k, s] = u_s^T G_k u_s restricted to the support
    M = sp.Matrix([[(sp.Matrix(list(dirs[s])).T * G * sp.Matrix(list(dirs[s])))[0, 0] for s in support]
                   for G in metrics])
    null = M.nullspace()
    if not null:
        return None
    N = sp.Matrix.hstack(*null)
    lam_f = sp.Matrix([sp.Rational(Fraction(float(weights[s])).limit_denominator(10**6)) for s in support])
    coef = (N.T * N).solve(N.T * lam_f)
    lam = N * coef
    if any(v < 0 for v in lam) or sum(lam) <= 0:
        return None
    assert all(v == 0 for v in M * lam)
    total = sum(lam)
    return {"directions": [[str(x) for x in dirs[s]] for s in support],
            "weights": [str(v / total) for v in lam], "basis_size": len(metrics)}


def _skt_feasibility_float(sc, J, max_cuts, slack_tol) -> FeasibilityResult:
    """Floating-point variant for irrational data; never claims exactness."""
    from scipy.linalg import null_space
    from scipy.optimize import linprog
    from .forms import ce_matrix, multi_indices
    dim = sc.dim
    pairs = multi_indices(dim, 2)

    def compound(k):
        idx = multi_indices(dim, k)
        return np.array([[np.linalg.det(J[np.ix_(K, I)]) for K in idx] for I in idx])

    B = null_space(compound(2) - np.eye(len(pairs)))
    K = null_space(ce_matrix(sc, 3).real @ (-compound(3)) @ ce_matrix(sc, 2).real @ B, rcond=1e-10)
    basis = B @ K
    Gs = []
    for col in basis.T:
        W = np.zeros((dim, dim))
        for r, (a, b) in enumerate(pairs):
            W[a, b], W[b, a] = col[r], -col[r]
        Gs.append(J.T @ W)
    m = len(Gs)
    if m == 0:
        return FeasibilityResult(False, False, 0.0, note="no J-invariant dd^c-closed 2-forms")
    Gf = np.array(Gs)
    dirs = [np.asarray(u, float) for u in _initial_directions(dim)]
    slack = 0.0
    for _ in range(max_cuts):
        U = np.array(dirs)
        Q = np.einsum("su,kuv,sv->sk", U, Gf, U)
        res = linprog(np.r_[np.zeros(m), -1.0], A_ub=np.hstack([-Q, np.ones((len(dirs), 1))]),
                      b_ub=np.zeros(len(dirs)), bounds=[(-1, 1)] * m + [(None, 1)], method="highs")
        x, slack = res.x[:m], float(-res.fun)
        if slack <= slack_tol:
            return FeasibilityResult(False, False, slack, note="LP optimum is zero (floating point)")
        w, V = np.linalg.eigh(np.einsum("k,kuv->uv", x, Gf))
        if w[0] > 0:
            omega = InvariantForm(dim, 2, (basis @ x).astype(complex))
            return FeasibilityResult(True, False, slack, omega, note="floating-point witness")
        dirs.append(V[:, 0])
    return FeasibilityResult(False, False, slack, note="cutting-plane budget exhausted")
