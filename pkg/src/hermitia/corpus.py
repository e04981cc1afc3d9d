"""Built-in Hermitian Lie algebras: the worked examples plus reference surfaces.

Parametrised entries are addressed with ``corpus:`` URIs, e.g.
``corpus:nilpotent_8d?l1=1&l2=1&a=0`` or ``corpus:calabi_eckmann?t=0.5``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable
from urllib.parse import parse_qsl, urlparse

import numpy as np

from .almost_abelian import AlmostAbelianSpec, build as build_almost_abelian, example_6d
from .forms import InvariantForm, multi_indices, wedge
from .hermitian import HermitianStructure, StructureError
from .lie_algebra import StructureConstants, jacobi_residual, new_algebra

# A term of a complex structure equation: (coefficient, (index, barred), (index, barred)),
# with 1-based coframe indices, e.g. (1j, (1, False), (3, True)) is i phi^1 ^ conj(phi^3).
Term = tuple[complex, tuple[int, bool], tuple[int, bool]]


def standard_coframe(n: int) -> np.ndarray:
    """Rows ``phi^j = e^{2j-1} + i e^{2j}``."""
    Phi = np.zeros((n, 2 * n), dtype=complex)
    for j in range(n):
        Phi[j, 2 * j] = 1.0
        Phi[j, 2 * j + 1] = 1j
    return Phi


def complex_structure_from_coframe(Phi: np.ndarray) -> np.ndarray:
    """Real ``J`` for which the rows of ``Phi`` are (1,0)-forms."""
    n = Phi.shape[0]
    M = np.vstack([Phi, Phi.conj()])
    D = np.diag([1j] * n + [-1j] * n)
    J = np.linalg.solve(M, D @ M)
    if np.abs(J.imag).max() > 1e-10:
        raise StructureError("coframe does not define a real complex structure")
    return J.real


def metric_from_coframe(Phi: np.ndarray) -> np.ndarray:
    """``g(x, y) = Re sum_j phi^j(x) conj(phi^j(y))``; the coframe is unitary for it."""
    return np.real(Phi.T @ Phi.conj())


def _complex_one_forms(Phi: np.ndarray) -> list[InvariantForm]:
    M = np.vstack([Phi, Phi.conj()])
    return [InvariantForm.one_form(row) for row in M]


def algebra_from_complex_equations(Phi: np.ndarray, equations: dict[int, list[Term]]) -> StructureConstants:
    """Real structure constants from ``d phi^j`` written in the coframe ``Phi``.

    Equations for the conjugates follow by conjugation; missing ``j`` means
    ``d phi^j = 0``.
    """
    n, dim = Phi.shape
    basis = _complex_one_forms(Phi)
    dphi = []
    for j in range(1, n + 1):
        acc = InvariantForm.zero(dim, 2, True)
        for coef, (a, abar), (b, bbar) in equations.get(j, []):
            fa = basis[a - 1 + (n if abar else 0)]
            fb = basis[b - 1 + (n if bbar else 0)]
            acc = acc + coef * wedge(fa, fb)
        dphi.append(acc)
    dtheta = np.array([f.coeffs for f in dphi] + [f.coeffs.conj() for f in dphi])  # (2n, C(dim,2))
    M = np.vstack([Phi, Phi.conj()])
    de = np.linalg.solve(M, dtheta)                    # e^k = sum_a Minv[k, a] theta^a
    if np.abs(de.imag).max() > 1e-10:
        raise StructureError("complex structure equations are not consistent with a real algebra")
    de = de.real
    c = np.zeros((dim, dim, dim))
    for r, (i, j) in enumerate(multi_indices(dim, 2)):
        c[i, j, :] = -de[:, r]
        c[j, i, :] = de[:, r]
    sc = StructureConstants(c)
    jr = jacobi_residual(sc)
    if jr > 1e-10:
        raise StructureError(f"structure equations violate d^2 = 0 (Jacobi residual {jr:.3g})")
    return sc


def coframe_components(form: InvariantForm, Phi: np.ndarray, tol: float = 1e-12) -> dict[str, complex]:
    """Coefficients of a form on wedges of ``phi^j`` and ``conj(phi^j)``.

    Keys look like ``"13b"`` for ``phi^1 ^ conj(phi^3)`` (unbarred first).
    """
    n, dim = Phi.shape
    M = np.vstack([Phi, Phi.conj()])
    V = np.linalg.inv(M)          # column a is the vector dual to theta^a
    out = {}
    for I in multi_indices(dim, form.degree):
        val = form(*[V[:, a] for a in I]) if form.degree else form.coeffs[0]
        if abs(val) > tol:
            label = "".join(str(a + 1) for a in I if a < n) + "".join(f"{a - n + 1}b" for a in I if a >= n)
            out[label] = complex(val)
    return out


def complex_structure_equations(sc: StructureConstants, Phi: np.ndarray, tol: float = 1e-12
                                ) -> dict[int, dict[str, complex]]:
    """Round trip: ``d phi^j`` of a real algebra expressed back in the coframe."""
    from .forms import ce_differential
    return {j + 1: coframe_components(ce_differential(sc, InvariantForm.one_form(Phi[j])), Phi, tol)
            for j in range(Phi.shape[0])}


def _std_J(n: int) -> np.ndarray:
    return complex_structure_from_coframe(standard_coframe(n))


# -- entries ---------------------------------------------------------------------

def flat_torus(n: int = 2) -> HermitianStructure:
    return HermitianStructure(new_algebra(2 * n, []), _std_J(n))


def kodaira_surface() -> HermitianStructure:
    """Heisenberg x R with ``[e1, e2] = e3``, ``J e1 = e2``, ``J e3 = e4``."""
    return HermitianStructure(new_algebra(4, [(1, 2, 3, 1.0)]), _std_J(2))


def hopf_surface() -> HermitianStructure:
    """su(2) + R with ``[e1,e2]=e3`` cyclic, ``e4`` central, ``J e3 = e4``."""
    sc = new_algebra(4, [(1, 2, 3, 1.0), (2, 3, 1, 1.0), (3, 1, 2, 1.0)])
    return HermitianStructure(sc, _std_J(2))


def su2_su2() -> StructureConstants:
    """Basis ``(e1, e2, e3, f1, f2, f3)`` with ``[e1,e2]=2e3, [e1,e3]=-2e2, [e2,e3]=2e1``."""
    br = [(1, 2, 3, 2.0), (1, 3, 2, -2.0), (2, 3, 1, 2.0)]
    return new_algebra(6, br + [(i + 3, j + 3, k + 3, v) for i, j, k, v in br])


def calabi_eckmann_coframe(t: complex = 0.0) -> np.ndarray:
    """``phi^1 = e^1 + i e^2, phi^2 = f^1 + i f^2, phi^3_t = phi^3 - t conj(phi^3)``."""
    Phi = np.zeros((3, 6), dtype=complex)
    Phi[0, 0], Phi[0, 1] = 1, 1j
    Phi[1, 3], Phi[1, 4] = 1, 1j
    phi3 = np.zeros(6, dtype=complex)
    phi3[2], phi3[5] = 1, 1j
    Phi[2] = phi3 - t * phi3.conj()
    return Phi


def calabi_eckmann_su2su2(t: complex = 0.0) -> HermitianStructure:
    """SU(2) x SU(2) with the (deformed) Calabi-Eckmann structure ``J_t``.

    The metric makes the deformed coframe unitary; at ``t = 0`` it is the
    bi-invariant metric (identity in the defining basis).
    """
    if abs(t) >= 1:
        raise ValueError("the deformation needs |t| < 1")
    Phi = calabi_eckmann_coframe(t)
    return HermitianStructure(su2_su2(), complex_structure_from_coframe(Phi), metric_from_coframe(Phi))


def nilpotent_equations(l1: float, l2: float, a: float) -> dict[int, list[Term]]:
    return {
        3: [(l1, (1, False), (1, True)), (1j * a, (2, False), (2, True))],
        4: [(l2, (2, False), (2, True))],
    }


def nilpotent_8d(l1: float = 1.0, l2: float = 1.0, a: float = 0.0) -> HermitianStructure:
    """Complex 4-dimensional nilpotent example with a unitary coframe.

    ``d phi^3 = l1 phi^{1 1b} + i a phi^{2 2b}``, ``d phi^4 = l2 phi^{2 2b}``.
    """
    if l1 <= 0 or l2 <= 0:
        raise ValueError("l1 and l2 must be positive")
    Phi = standard_coframe(4)
    sc = algebra_from_complex_equations(Phi, nilpotent_equations(l1, l2, a))
    return HermitianStructure(sc, complex_structure_from_coframe(Phi), metric_from_coframe(Phi))


def almost_abelian_6d() -> AlmostAbelianSpec:
    return example_6d()


# -- registry ------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusEntry:
    name: str
    builder: Callable[..., HermitianStructure]
    expected: dict[str, bool] = field(default_factory=dict)
    note: str = ""
    params: dict[str, type] = field(default_factory=dict)

    def build(self, **kwargs) -> HermitianStructure:
        return self.builder(**kwargs)


def _aa6d() -> HermitianStructure:
    return build_almost_abelian(example_6d())


ENTRIES: dict[str, CorpusEntry] = {e.name: e for e in [
    CorpusEntry("flat_torus_2", lambda: flat_torus(2),
                {"kahler": True, "skt": True, "vaisman": True, "kahler_like": True, "bismut_flat": True},
                "abelian R^4 with the standard structure"),
    CorpusEntry("flat_torus_3", lambda: flat_torus(3),
                {"kahler": True, "skt": True, "kahler_like": True, "bismut_flat": True},
                "abelian R^6 with the standard structure"),
    CorpusEntry("kodaira", kodaira_surface,
                {"kahler": False, "skt": True, "gauduchon": True, "lck": True, "vaisman": True,
                 "bianchi": True, "kahler_like": True, "parallel_torsion_B": True},
                "primary Kodaira surface model"),
    CorpusEntry("hopf", hopf_surface,
                {"kahler": False, "skt": True, "gauduchon": True, "lck": True, "vaisman": True,
                 "bianchi": True, "kahler_like": True, "parallel_torsion_B": True},
                "Hopf surface model su(2)+R"),
    CorpusEntry("calabi_eckmann", calabi_eckmann_su2su2,
                {"kahler": False, "skt": True, "bianchi": True, "kahler_like": True, "bismut_flat": True,
                 "parallel_torsion_B": True},
                "SU(2)xSU(2), central Calabi-Eckmann structure at t=0; metric unitary for the deformed coframe",
                {"t": complex}),
    CorpusEntry("nilpotent_8d", nilpotent_8d,
                {"kahler": False, "skt": True, "astheno": False, "lee_potential": False},
                "nilpotent complex 4-fold, SKT but neither LP nor astheno-Kahler",
                {"l1": float, "l2": float, "a": float}),
    CorpusEntry("aa6d", _aa6d,
                {"kahler": False, "skt": True, "bianchi": True, "kahler_like": True,
                 "parallel_torsion_B": True, "symmetry13": False, "bismut_flat": False},
                "almost abelian 6-dim example [e6,e1]=e2, [e6,e4]=e5, [e6,e5]=-e4"),
]}

_ALIASES = {"kodaira_surface": "kodaira", "hopf_surface": "hopf", "calabi_eckmann_su2su2": "calabi_eckmann",
            "almost_abelian_6d": "aa6d"}


def _parse_value(kind: type, text: str):
    if kind is complex:
        return complex(text.replace(" ", "").replace("i", "j"))
    return kind(text)


def resolve(uri: str) -> tuple[CorpusEntry, HermitianStructure]:
    """Build a corpus entry from ``corpus:name?key=value&...``."""
    if not uri.startswith("corpus:"):
        raise ValueError(f"not a corpus URI: {uri!r}")
    parsed = urlparse(uri[len("corpus:"):])
    name = _ALIASES.get(parsed.path, parsed.path)
    if name not in ENTRIES:
        raise KeyError(f"unknown corpus entry {parsed.path!r}; known: {', '.join(sorted(ENTRIES))}")
    entry = ENTRIES[name]
    kwargs = {}
    # keep '+' literal so complex values like 0.3+0.2j survive
    for key, val in parse_qsl(parsed.query.replace("+", "%2B")):
        if key not in entry.params:
            raise KeyError(f"entry {name!r} takes no parameter {key!r}")
        kwargs[key] = _parse_value(entry.params[key], val)
    return entry, entry.build(**kwargs)


def names() -> list[str]:
    return sorted(ENTRIES)




# -- structure files -------------------------------------------------------------

class InputError(ValueError):
    """Unreadable or malformed structure input."""


def structure_to_json(H: HermitianStructure, spec: AlmostAbelianSpec | None = None) -> dict:
    out = {"algebra": H.sc.to_json(), "J": H.J.tolist(), "g": H.g.tolist()}
    if spec is not None:
        out["almost_abelian"] = spec.to_json()
    return out


def structure_from_json(obj: dict) -> HermitianStructure:
    if "almost_abelian" in obj and "algebra" not in obj:
        return build_almost_abelian(AlmostAbelianSpec.from_json(obj["almost_abelian"]))
    try:
        sc = StructureConstants.from_json(obj["algebra"])
        return HermitianStructure(sc, np.array(obj["J"], dtype=float),
                                  None if obj.get("g") is None else np.array(obj["g"], dtype=float))
    except KeyError as exc:
        raise InputError(f"missing key {exc.args[0]!r} in structure JSON") from exc


def _read_json(source: str) -> dict:
    text = Path(source).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        line = lines[exc.lineno - 1] if exc.lineno <= len(lines) else ""
        raise InputError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}\n  {line}\n  {' ' * (exc.colno - 1)}^") from exc


def load_structure(source: str) -> HermitianStructure:
    """A structure from a ``corpus:`` URI or a JSON file."""
    if source.startswith("corpus:"):
        return resolve(source)[1]
    return structure_from_json(_read_json(source))


def load_almost_abelian(source: str) -> AlmostAbelianSpec:
    if source.startswith("corpus:"):
        name = _ALIASES.get(urlparse(source[len("corpus:"):]).path, urlparse(source[len("corpus:"):]).path)
        if name != "aa6d":
            raise InputError(f"corpus entry {name!r} is not almost abelian")
        return almost_abelian_6d()
    obj = _read_json(source)
    if "almost_abelian" not in obj:
        raise InputError(f"{source}: expected an 'almost_abelian' object")
    return AlmostAbelianSpec.from_json(obj["almost_abelian"])
