"""Invariant pluriclosed flow and its reduction on Vaisman surfaces.

The flow is ``d/dt omega = -(rho^B)^{1,1}`` with ``J`` frozen.  On a Vaisman
surface with Lee form ``theta0`` the ansatz

    omega_t = (theta0 ^ J theta0 - f(t) dJ theta0) / |theta0|^2

solves the flow iff ``f' = |theta0|^2 (h + 1/f)``, ``f(0) = 1``, where ``h`` is
the Chern-Ricci coefficient ``rho^Ch = h dJ theta``.  Along the family
``rho^Ch`` is constant and ``rho^B = (h + 1/f) dJ theta0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._ode import n_steps, rk4_step
from .classifiers import lck_vaisman_residuals, skt_residual
from .connections import bismut, chern, levi_civita, ricci_form, riemannian_scalar
from .forms import InvariantForm, wedge
from .hermitian import HermitianStructure, StructureError, metric_from_omega
from .lie_algebra import DEFAULT_TOL

GUARD = 1e-10


def pluriclosed_step(H: HermitianStructure, tol: float = 1e-8, check: bool = True) -> InvariantForm:
    """Flow velocity ``-(rho^B)^{1,1}``."""
    if check:
        r = skt_residual(H)
        if r > tol:
            raise StructureError(f"initial metric is not SKT (residual {r:.3e})")
    rho, _ = ricci_form(H, bismut(H))
    return -H.bidegree_project(rho, 1, 1).real


@dataclass
class PluriclosedTrajectory:
    times: np.ndarray
    omegas: np.ndarray                 # real coefficient rows
    structure0: HermitianStructure
    monitors: dict[str, np.ndarray] = field(default_factory=dict)
    halted: str | None = None

    def omega_at(self, i: int) -> InvariantForm:
        return InvariantForm(self.structure0.dim, 2, self.omegas[i].astype(complex))

    def structure_at(self, i: int) -> HermitianStructure:
        return self.structure0.with_omega(self.omega_at(i))

    def csv_header(self) -> list[str]:
        from .forms import multi_indices
        cols = ["t"] + [f"w{a + 1}{b + 1}" for a, b in multi_indices(self.structure0.dim, 2)]
        return cols + list(self.monitors)

    def rows(self):
        for i, t in enumerate(self.times):
            yield [t, *self.omegas[i], *(self.monitors[k][i] for k in self.monitors)]


def integrate_pluriclosed(H0: HermitianStructure, t_max: float, dt: float = 1e-3,
                          tol: float = 1e-8, monitor_every: int = 1) -> PluriclosedTrajectory:
    """RK4 on the coefficients of ``omega``; ``g = J^T W`` is rebuilt at every stage.

    Monitors: ``skt``, ``min_eig`` (smallest metric eigenvalue) and, on surfaces,
    ``vaisman``.  Rows that were not monitored hold NaN.  Integration halts when
    positivity is lost or values stop being finite.
    """
    pluriclosed_step(H0, tol)
    steps = n_steps(t_max, dt)
    J = H0.J
    dim = H0.dim

    def rhs(_t, y):
        H = H0.with_omega(InvariantForm(dim, 2, y.astype(complex)))
        return pluriclosed_step(H, check=False).coeffs.real

    y = H0.omega.coeffs.real.copy()
    times, ys, halted = [0.0], [y], None
    for i in range(steps):
        try:
            y = rk4_step(rhs, i * dt, y, dt)
        except (StructureError, np.linalg.LinAlgError) as exc:
            halted = f"positivity lost near t={(i + 1) * dt:.6g}: {exc}"
            break
        if not np.all(np.isfinite(y)):
            halted = f"non-finite state at t={(i + 1) * dt:.6g}"
            break
        times.append((i + 1) * dt)
        ys.append(y)
    traj = PluriclosedTrajectory(np.array(times), np.array(ys), H0, halted=halted)
    n = len(times)
    names = ["skt", "min_eig"] + (["vaisman"] if H0.n == 2 else [])
    for k in names:
        traj.monitors[k] = np.full(n, np.nan)
    for i in range(n):
        if i % monitor_every and i != n - 1:
            continue
        w = traj.omega_at(i)
        traj.monitors["min_eig"][i] = np.linalg.eigvalsh(metric_from_omega(J, w))[0]
        try:
            H = H0.with_omega(w)
        except StructureError:
            continue
        traj.monitors["skt"][i] = skt_residual(H)
        if H0.n == 2:
            traj.monitors["vaisman"][i] = lck_vaisman_residuals(H)[1]
    return traj


# -- Vaisman surfaces ----------------------------------------------------------

def proportionality(H: HermitianStructure, a: InvariantForm, base: InvariantForm,
                    guard: float = GUARD) -> tuple[float, float]:
    """Least-squares ``h`` with ``a ~ h base``; returns ``(h, ||a - h base||)``."""
    bb = H.form_norm(base)
    if bb < guard:
        raise ValueError("h undefined (dJtheta ~ 0)")
    h = float(np.real(H.form_inner(base, a)) / bb**2)
    return h, H.form_norm(a - h * base)


@dataclass(frozen=True)
class VaismanFlowState:
    f: float
    h: float
    norm2: float
    theta0: InvariantForm
    Jtheta0: InvariantForm
    dJtheta0: InvariantForm

    def omega(self, f: float | None = None) -> InvariantForm:
        f = self.f if f is None else f
        return (wedge(self.theta0, self.Jtheta0) - f * self.dJtheta0) / self.norm2

    def rhs(self, f: float) -> float:
        return self.norm2 * (self.h + 1.0 / f)


def lee_data(H: HermitianStructure) -> tuple[InvariantForm, InvariantForm, InvariantForm, float]:
    theta = H.lee_form().theta.real
    if H.form_norm(theta) < GUARD:
        raise ValueError("Lee form vanishes")
    Jt = H.J_form(theta)
    return theta, Jt, H.d(Jt), H.form_norm(theta) ** 2


def vaisman_from_lee(H: HermitianStructure) -> InvariantForm:
    """``(theta ^ J theta - dJ theta) / |theta|^2``."""
    theta, Jt, dJt, n2 = lee_data(H)
    return (wedge(theta, Jt) - dJt) / n2


def chern_coefficient(H: HermitianStructure) -> tuple[float, float]:
    """``h`` with ``rho^Ch = h dJ theta`` and the least-squares residual."""
    _, _, dJt, _ = lee_data(H)
    rho, _ = ricci_form(H, chern(H))
    return proportionality(H, rho.real, dJt)


def vaisman_state(H: HermitianStructure, tol: float = 1e-8) -> VaismanFlowState:
    if H.n != 2:
        raise ValueError("Vaisman flow reduction is for surfaces")
    v = lck_vaisman_residuals(H)[1]
    if v > tol:
        raise StructureError(f"metric is not Vaisman (residual {v:.3e})")
    theta, Jt, dJt, n2 = lee_data(H)
    h, _ = chern_coefficient(H)
    return VaismanFlowState(1.0, h, n2, theta, Jt, dJt)


@dataclass
class VaismanTrajectory:
    times: np.ndarray
    f: np.ndarray
    state: VaismanFlowState
    structure0: HermitianStructure | None = None
    halted: str | None = None

    @property
    def fixed_point(self) -> float | None:
        return -1.0 / self.state.h if self.state.h < 0 else None

    def omega_at(self, i: int) -> InvariantForm:
        return self.state.omega(float(self.f[i]))

    def structure_at(self, i: int) -> HermitianStructure:
        if self.structure0 is None:
            raise ValueError("no reference structure attached")
        return self.structure0.with_omega(self.omega_at(i))


def vaisman_f_ode(state: VaismanFlowState, t_max: float, dt: float = 1e-3,
                  structure0: HermitianStructure | None = None) -> VaismanTrajectory:
    """RK4 for ``f' = |theta0|^2 (h + 1/f)`` with a positivity guard."""
    if state.norm2 <= 0:
        raise ValueError("|theta0|^2 must be positive")
    steps = n_steps(t_max, dt)
    f = np.array([state.f])
    times, fs, halted = [0.0], [state.f], None
    for i in range(steps):
        f = rk4_step(lambda _t, y: state.rhs(y[0]) * np.ones(1), i * dt, f, dt)
        if not np.isfinite(f[0]) or f[0] <= 0:
            halted = f"f reached 0 near t={(i + 1) * dt:.6g}"
            break
        times.append((i + 1) * dt)
        fs.append(float(f[0]))
    return VaismanTrajectory(np.array(times), np.array(fs), state, structure0, halted)


def f_closed_form(h: float, norm2: float, t: np.ndarray) -> np.ndarray:
    """Exact solution for ``h = 0`` (``sqrt(1 + 2|theta|^2 t)``) and the stationary case ``h = -1``."""
    t = np.asarray(t, dtype=float)
    if h == 0:
        return np.sqrt(1 + 2 * norm2 * t)
    if h == -1:
        return np.ones_like(t)
    raise ValueError("closed form only for h in {0, -1}")


@dataclass(frozen=True)
class ScalarSample:
    t: float
    s: float
    b: float
    h: float
    hB: float
    norm2: float
    identity: float         # |b - (s - 2|theta|^2 + |d omega|^2 / 2)|
    b_vs_h: float           # |b + 2 hB |theta|^2|
    h_vs_f: float           # |h_t - f(t) h_0| (NaN without f)


def scalar_sample(H: HermitianStructure, t: float = 0.0, f: float | None = None,
                  h0: float | None = None) -> ScalarSample:
    _, _, dJt, n2 = lee_data(H)
    s = riemannian_scalar(H, levi_civita(H))
    rhoB, b = ricci_form(H, bismut(H))
    rhoC, _ = ricci_form(H, chern(H))
    h, _ = proportionality(H, rhoC.real, dJt)
    hB, _ = proportionality(H, rhoB.real, dJt)
    dw = H.form_norm(H.d(H.omega)) ** 2
    hv = abs(h - f * h0) if (f is not None and h0 is not None) else float("nan")
    return ScalarSample(t, s, b, h, hB, n2, abs(b - (s - 2 * n2 + 0.5 * dw)), abs(b + 2 * hB * n2), hv)


def constant_scalar_monitor(traj: VaismanTrajectory | PluriclosedTrajectory,
                            every: int = 1) -> list[ScalarSample]:
    """Per-step ``(s, b, h_t)`` with the identity residuals; surfaces only."""
    if traj.structure0 is None or traj.structure0.n != 2:
        raise ValueError("scalar monitor needs a surface structure")
    out = []
    h0 = None
    for i in range(0, len(traj.times), every):
        H = traj.structure_at(i)
        f = float(traj.f[i]) if isinstance(traj, VaismanTrajectory) else None
        if h0 is None and f is not None:
            h0 = traj.state.h
        out.append(scalar_sample(H, float(traj.times[i]), f, h0))
    return out


def ansatz_residual(traj: VaismanTrajectory, i: int) -> float:
    """``||d/dt omega_t + (rho^B_{omega_t})^{1,1}||`` using the ODE right-hand side for ``f'``."""
    st = traj.state
    f = float(traj.f[i])
    H = traj.structure_at(i)
    dwdt = -st.rhs(f) / st.norm2 * st.dJtheta0
    return H.form_norm(dwdt - pluriclosed_step(H, check=False))


def degeneration_time(h: float, norm2: float) -> float:
    """Time at which ``f`` would reach 0; infinite for this flow since ``1/f`` repels 0."""
    return math.inf


# -- bracket-flow view ---------------------------------------------------------

def _pi(P: np.ndarray, c: np.ndarray) -> np.ndarray:
    """``(pi(P) mu)(x, y) = P mu(x, y) - mu(Px, y) - mu(x, Py)`` on structure constants."""
    return (np.einsum("ijm,km->ijk", c, P) - np.einsum("mi,mjk->ijk", P, c)
            - np.einsum("mj,imk->ijk", P, c))


def bracket_velocity(H: HermitianStructure) -> np.ndarray:
    """Bracket variation equivalent to the metric velocity with ``g`` and ``J`` held fixed.

    With ``g' = 2 g(P., .)`` the flow is gauge-equivalent to ``mu' = pi(P) mu``.
    """
    gdot = H.J.T @ pluriclosed_step(H, check=False).to_tensor().real
    return _pi(0.5 * np.linalg.solve(H.g, gdot), H.sc.c)


def unitary_gauge_residual(H: HermitianStructure, mu_dot: np.ndarray) -> float:
    """Distance from ``mu_dot - bracket_velocity(H)`` to ``{pi(D) mu : D in u(g, J)}`` (max-norm)."""
    diff = (mu_dot - bracket_velocity(H)).ravel()
    N = H.dim
    gens = []
    for i in range(N):
        for j in range(i + 1, N):
            E = np.zeros((N, N))
            E[i, j], E[j, i] = 1.0, -1.0
            E = H.frame @ E @ H.frame.T @ H.g          # skew for g
            gens.append(0.5 * (E - H.J @ E @ H.J))
    M = np.array([_pi(E, H.sc.c).ravel() for E in gens]).T
    x = np.linalg.lstsq(M, diff, rcond=None)[0]
    return float(np.abs(M @ x - diff).max())
