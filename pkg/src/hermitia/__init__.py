"""Hermitian geometry of Lie algebras: exterior calculus, Bismut/Chern/Levi-Civita
connections, metric classification and the invariant pluriclosed flow."""

from .lie_algebra import StructureConstants, abelian, ad, is_unimodular, jacobi_residual, new_algebra
from .forms import InvariantForm, ce_differential, wedge
from .hermitian import HermitianStructure, StructureError
from .connections import bismut, chern, curvature, levi_civita, ricci_form, torsion_3form
from .classifiers import ClassificationReport, classify, skt_feasibility_invariant
from .almost_abelian import AlmostAbelianSpec
from . import corpus

__version__ = "0.1.0"

__all__ = [
    "StructureConstants", "abelian", "ad", "is_unimodular", "jacobi_residual", "new_algebra",
    "InvariantForm", "ce_differential", "wedge", "HermitianStructure", "StructureError",
    "bismut", "chern", "curvature", "levi_civita", "ricci_form", "torsion_3form",
    "ClassificationReport", "classify", "skt_feasibility_invariant", "AlmostAbelianSpec", "corpus",
]
