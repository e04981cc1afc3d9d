"""Almost abelian Hermitian Lie algebras encoded by ``(a, v, A, J1)``.

Basis convention: ``e_1`` first, ``n_1 = span(e_2, ..., e_{2n-1})``,
``e_{2n}`` last.  The only brackets are ``[e_{2n}, e_1] = a e_1 + v`` and
``[e_{2n}, x] = A x`` for ``x`` in ``n_1``; ``J e_1 = e_{2n}``, ``J|n_1 = J1``
and ``g`` is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from ._ode import n_steps, rk4_step
from .hermitian import HermitianStructure, StructureError
from .lie_algebra import StructureConstants, ad

RANK_RTOL = 1e-8


def standard_J(m: int) -> np.ndarray:
    """Complex structure on R^m pairing consecutive basis vectors."""
    if m % 2:
        raise ValueError("complex structures need even dimension")
    J = np.zeros((m, m))
    for i in range(0, m, 2):
        J[i + 1, i] = 1.0
        J[i, i + 1] = -1.0
    return J


@dataclass(frozen=True, eq=False)
class AlmostAbelianSpec:
    a: float
    v: np.ndarray
    A: np.ndarray
    J1: np.ndarray = None

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.v, dtype=float))
        A = np.asarray(self.A, dtype=float).reshape(len(v), len(v))
        J1 = standard_J(len(v)) if self.J1 is None else np.asarray(self.J1, dtype=float)
        if len(v) % 2:
            raise ValueError("n_1 must be even-dimensional")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "J1", J1)

    @property
    def n(self) -> int:
        return len(self.v) // 2 + 1

    @property
    def dim(self) -> int:
        return 2 * self.n

    def commutator_residual(self) -> float:
        return float(np.abs(self.A @ self.J1 - self.J1 @ self.A).max()) if self.A.size else 0.0

    def state(self) -> np.ndarray:
        return np.concatenate([[self.a], self.v, self.A.ravel()])

    @classmethod
    def from_state(cls, y: np.ndarray, m: int, J1: np.ndarray | None = None) -> "AlmostAbelianSpec":
        return cls(y[0], y[1:1 + m], y[1 + m:].reshape(m, m), J1)

    def to_json(self) -> dict:
        return {"a": self.a, "v": self.v.tolist(), "A": self.A.tolist(), "J1": self.J1.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "AlmostAbelianSpec":
        return cls(obj["a"], obj["v"], obj["A"], obj.get("J1"))


def ad_matrix(spec: AlmostAbelianSpec) -> np.ndarray:
    """The full block matrix of ``ad e_{2n}``: ``((a,0,0),(v,A,0),(0,0,0))``."""
    m, N = len(spec.v), spec.dim
    M = np.zeros((N, N))
    M[0, 0] = spec.a
    M[1:1 + m, 0] = spec.v
    M[1:1 + m, 1:1 + m] = spec.A
    return M


def structure_constants(spec: AlmostAbelianSpec) -> StructureConstants:
    N = spec.dim
    M = ad_matrix(spec)
    c = np.zeros((N, N, N))
    last = N - 1
    for j in range(N - 1):
        c[last, j, :] = M[:, j]
        c[j, last, :] = -M[:, j]
    return StructureConstants(c)


def complex_structure(spec: AlmostAbelianSpec) -> np.ndarray:
    N, m = spec.dim, len(spec.v)
    J = np.zeros((N, N))
    J[N - 1, 0] = 1.0
    J[0, N - 1] = -1.0
    J[1:1 + m, 1:1 + m] = spec.J1
    return J


def build(spec: AlmostAbelianSpec, tol: float = 1e-9) -> HermitianStructure:
    res = spec.commutator_residual()
    if res > tol:
        raise StructureError(f"[A, J1] != 0 (residual {res:.3g}); J would not be integrable")
    return HermitianStructure(structure_constants(spec), complex_structure(spec), np.eye(spec.dim))


# -- closed-form criteria ------------------------------------------------------

def skt_criterion(spec: AlmostAbelianSpec) -> float:
    """Frobenius norm of the symmetric part of ``aA + A^2 + A^t A``."""
    A = spec.A
    M = spec.a * A + A @ A + A.T @ A
    return float(np.linalg.norm(0.5 * (M + M.T)))


def is_skew(A: np.ndarray, tol: float = 1e-9) -> bool:
    return A.size == 0 or float(np.abs(A + A.T).max()) <= tol


@dataclass(frozen=True)
class CriterionResult:
    residual: float
    applicable: bool
    note: str = ""


def kahler_like_criterion(spec: AlmostAbelianSpec, tol: float = 1e-9) -> CriterionResult:
    """``max_y |g(v, A y)|`` over basis vectors ``y`` of ``n_1`` (needs ``A`` skew)."""
    if not is_skew(spec.A, tol):
        from .classifiers import kahler_like_residuals
        bianchi, j_inv = kahler_like_residuals(build(spec))
        return CriterionResult(max(bianchi, j_inv), False, "A not skew: full tensor check used")
    val = float(np.abs(spec.A.T @ spec.v).max()) if spec.v.size else 0.0
    return CriterionResult(val, True)


def kahler_criterion(spec: AlmostAbelianSpec) -> float:
    return float(np.linalg.norm(spec.v) + np.linalg.norm(spec.A + spec.A.T))


def bismut_closed_form(spec: AlmostAbelianSpec) -> np.ndarray:
    """Bismut Christoffel symbols ``Gamma[i, j, k]`` from the component lemma."""
    N, m = spec.dim, len(spec.v)
    a, v, A, J1 = spec.a, spec.v, spec.A, spec.J1
    S = 0.5 * (A + A.T)
    G = np.zeros((N, N, N))
    e1, en = 0, N - 1
    n1 = slice(1, 1 + m)
    G[e1, e1, en] = a
    G[e1, en, e1] = -a
    SJ = S @ J1
    for p in range(m):
        x = 1 + p
        # nabla_x e_1 = S J x + g(v, x) e_{2n}
        G[x, e1, n1] = SJ[:, p]
        G[x, e1, en] = v[p]
        # nabla_{e_1} y = -S J y
        G[e1, x, n1] = -SJ[:, p]
        # nabla_{e_2n} y = 1/2 (A - A^t) y
        G[en, x, n1] = 0.5 * (A - A.T)[:, p]
        # nabla_x e_{2n} = -g(v, x) e_1 - S x
        G[x, en, e1] = -v[p]
        G[x, en, n1] = -S[:, p]
        for q in range(m):
            y = 1 + q
            # nabla_x y = g(x, S J y) e_1 + g(x, S y) e_{2n}
            G[x, y, e1] = SJ[p, q]
            G[x, y, en] = S[p, q]
    return G


def bismut_curvature_closed_form(spec: AlmostAbelianSpec) -> np.ndarray:
    """``R^B(x, y, z, w)`` for skew ``A`` from the listed nonzero components."""
    N, m = spec.dim, len(spec.v)
    e1, en = 0, N - 1
    R = np.zeros((N, N, N, N))
    w = spec.A.T @ spec.v           # w[q] = g(v, A e_q)
    s = spec.a ** 2 + spec.v @ spec.v
    for q in range(m):
        y = 1 + q
        # R(e_2n, y) e_1 = -g(v,Ay) e_2n ;  R(e_2n, y) e_2n = g(v,Ay) e_1
        R[en, y, e1, en] = -w[q]
        R[en, y, en, e1] = w[q]
    R[e1, en, e1, en] = s
    R[e1, en, en, e1] = -s
    return R - R.transpose(1, 0, 2, 3)


# -- pluriclosed flow in (a, v, A) ---------------------------------------------

@dataclass(frozen=True)
class FlowParams:
    c: float
    k: int
    S: np.ndarray


class RankAmbiguityError(ValueError):
    """A singular value of ``A + A^t`` sits too close to the rank threshold."""


def sym_rank(A: np.ndarray, k_override: int | None = None) -> int:
    if k_override is not None:
        return 2 * k_override
    sym = A + A.T
    if sym.size == 0:
        return 0
    sv = np.linalg.svd(sym, compute_uv=False)
    thr = RANK_RTOL * max(np.linalg.norm(A, 2), 1.0)
    borderline = sv[(sv > thr / 10) & (sv < thr * 10)]
    if borderline.size:
        raise RankAmbiguityError(
            f"singular values {borderline} of A+A^t are within 10x of the rank threshold {thr:.1e}; "
            "pass an explicit k")
    return int((sv > thr).sum())


def flow_params(spec: AlmostAbelianSpec, k_override: int | None = None) -> FlowParams:
    rank = sym_rank(spec.A, k_override)
    if rank % 2:
        raise RankAmbiguityError(f"rank of A+A^t is odd ({rank}); A cannot commute with J1")
    k = rank // 2
    a, v, A = spec.a, spec.v, spec.A
    base = (k / 4 - 0.5) * a ** 2
    c = base - 0.5 * float(v @ v)
    S = base * np.eye(len(v)) - 0.5 * A @ A.T + (a / 4) * (A + A.T)
    return FlowParams(c, k, S)


def flow_rhs(spec: AlmostAbelianSpec, k_override: int | None = None
             ) -> tuple[float, np.ndarray, np.ndarray]:
    p = flow_params(spec, k_override)
    v = spec.v
    dv = p.c * v + p.S @ v - 0.5 * float(v @ v) * v
    return p.c * spec.a, dv, p.c * spec.A


def _rhs_vec(spec0: AlmostAbelianSpec, k_override: int | None):
    m = len(spec0.v)

    def f(_t, y):
        da, dv, dA = flow_rhs(AlmostAbelianSpec.from_state(y, m, spec0.J1), k_override)
        return np.concatenate([[da], dv, dA.ravel()])
    return f


def _monitor_vector(spec: AlmostAbelianSpec) -> np.ndarray:
    return spec.A.T @ spec.v        # g(v, A e_q) for each basis vector of n_1


@dataclass
class FlowTrajectory:
    times: np.ndarray
    states: np.ndarray
    m: int
    J1: np.ndarray
    monitors: dict[str, np.ndarray] = field(default_factory=dict)
    halted: str | None = None

    def spec_at(self, i: int) -> AlmostAbelianSpec:
        return AlmostAbelianSpec.from_state(self.states[i], self.m, self.J1)

    def max_monitor(self, name: str) -> float:
        vals = self.monitors[name]
        vals = vals[np.isfinite(vals)]
        return float(vals.max()) if vals.size else 0.0

    def csv_header(self) -> list[str]:
        cols = ["t", "a"] + [f"v{i + 1}" for i in range(self.m)]
        cols += [f"A{i + 1}{j + 1}" for i in range(self.m) for j in range(self.m)]
        return cols + list(self.monitors)

    def rows(self):
        for i, t in enumerate(self.times):
            yield [t, *self.states[i], *(self.monitors[k][i] for k in self.monitors)]


def integrate_flow(spec: AlmostAbelianSpec, t_max: float, dt: float = 1e-3,
                   k_override: int | None = None, blowup: float = 1e12) -> FlowTrajectory:
    """RK4 integration of the reduced flow with per-step monitors.

    Monitors: ``kahler_like`` = max |g(v, A y)|, ``skt`` = skt_criterion,
    ``so_drift`` = ||A + A^t||, and ``deriv_identity`` = |central difference of
    g(v, A y) - g(v, A(3c + A^2/2) y)| (NaN at the two endpoints).
    """
    steps = n_steps(t_max, dt)
    m = len(spec.v)
    f = _rhs_vec(spec, k_override)
    y = spec.state()
    times, states = [0.0], [y]
    halted = None
    for i in range(steps):
        y = rk4_step(f, i * dt, y, dt)
        if not np.all(np.isfinite(y)) or np.abs(y).max() > blowup:
            halted = f"blow-up or NaN at t={(i + 1) * dt:.6g}"
            break
        times.append((i + 1) * dt)
        states.append(y)
    traj = FlowTrajectory(np.array(times), np.array(states), m, spec.J1, halted=halted)
    specs = [traj.spec_at(i) for i in range(len(times))]
    mon = np.array([_monitor_vector(s) for s in specs]).reshape(len(specs), m)
    traj.monitors["kahler_like"] = np.abs(mon).max(axis=1) if m else np.zeros(len(specs))
    traj.monitors["skt"] = np.array([skt_criterion(s) for s in specs])
    traj.monitors["so_drift"] = np.array([np.linalg.norm(s.A + s.A.T) for s in specs])
    ident = np.full(len(specs), np.nan)
    for i in range(1, len(specs) - 1):
        s = specs[i]
        c = flow_params(s, k_override).c
        pred = (s.A @ (3 * c * np.eye(m) + 0.5 * s.A @ s.A)).T @ s.v
        fd = (mon[i + 1] - mon[i - 1]) / (times[i + 1] - times[i - 1])
        ident[i] = np.abs(fd - pred).max() if m else 0.0
    traj.monitors["deriv_identity"] = ident
    return traj


# -- lattice heuristic ---------------------------------------------------------

def charpoly(M: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients (leading 1 first), Faddeev-LeVerrier."""
    N = M.shape[0]
    coeffs = np.zeros(N + 1)
    coeffs[0] = 1.0
    Mk = np.zeros_like(M)
    I = np.eye(N)
    for k in range(1, N + 1):
        Mk = M @ Mk + coeffs[k - 1] * I
        coeffs[k] = -np.trace(M @ Mk) / k
    return coeffs


@dataclass(frozen=True)
class LatticeCandidate:
    t0: float
    matrix: np.ndarray
    charpoly: np.ndarray
    integral: bool
    max_defect: float


def lattice_candidate(spec: AlmostAbelianSpec, t0: float, tol: float = 1e-9) -> LatticeCandidate:
    """Necessary condition for a lattice: ``exp(t0 ad e_{2n})`` has an integral char poly."""
    sc = structure_constants(spec)
    e_last = np.zeros(spec.dim)
    e_last[-1] = 1.0
    M = ad(sc, e_last)
    phi = expm(t0 * M)
    cp = charpoly(phi)
    defect = float(np.abs(cp - np.round(cp)).max())
    return LatticeCandidate(t0, phi, cp, defect <= tol, defect)


def example_6d() -> AlmostAbelianSpec:
    A = np.zeros((4, 4))
    A[3, 2] = 1.0   # [e6, e4] = e5
    A[2, 3] = -1.0  # [e6, e5] = -e4
    return AlmostAbelianSpec(0.0, [1.0, 0.0, 0.0, 0.0], A)


def random_spec(rng: np.random.Generator, n: int, skew: bool = True, scale: float = 1.0,
                a: float | None = None) -> AlmostAbelianSpec:
    """Random (a, v, A) with ``A`` commuting with the standard ``J1``.

    Matrices commuting with the standard J1 are complex-linear: blocks ``[[x, -y], [y, x]]``.
    """
    m = 2 * (n - 1)
    Z = rng.normal(size=(n - 1, n - 1)) + 1j * rng.normal(size=(n - 1, n - 1))
    if skew:
        Z = 0.5 * (Z - Z.conj().T)
    A = np.zeros((m, m))
    A[0::2, 0::2] = Z.real
    A[1::2, 1::2] = Z.real
    A[1::2, 0::2] = Z.imag
    A[0::2, 1::2] = -Z.imag
    a = rng.normal() if a is None else a
    return AlmostAbelianSpec(scale * a, scale * rng.normal(size=m), scale * A)


def random_kahler_like_spec(rng: np.random.Generator, n: int, kernel_dim: int = 1,
                            a: float | None = None) -> AlmostAbelianSpec:
    """Random instance with ``A`` skew and singular and ``v`` in ``ker A``, so ``A^t v = 0``."""
    k = n - 1
    if not 0 <= kernel_dim <= k:
        raise ValueError("kernel_dim must lie in [0, n-1]")
    U, _ = np.linalg.qr(rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k)))
    lam = rng.normal(size=k)
    lam[:kernel_dim] = 0.0
    Z = U @ np.diag(1j * lam) @ U.conj().T
    w = U[:, :kernel_dim] @ (rng.normal(size=kernel_dim) + 1j * rng.normal(size=kernel_dim))
    m = 2 * k
    A = np.zeros((m, m))
    A[0::2, 0::2] = Z.real
    A[1::2, 1::2] = Z.real
    A[1::2, 0::2] = Z.imag
    A[0::2, 1::2] = -Z.imag
    v = np.zeros(m)
    v[0::2], v[1::2] = w.real, w.imag
    a = rng.normal() if a is None else a
    return AlmostAbelianSpec(a, v, A)


__all__ = [
    "AlmostAbelianSpec", "FlowParams", "FlowTrajectory", "LatticeCandidate", "RankAmbiguityError",
    "build", "skt_criterion", "kahler_like_criterion", "kahler_criterion", "flow_params", "flow_rhs",
    "integrate_flow", "lattice_candidate", "bismut_closed_form", "bismut_curvature_closed_form",
    "example_6d", "random_spec", "random_kahler_like_spec", "ad_matrix", "charpoly", "standard_J",
]
