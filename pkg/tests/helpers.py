"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from hermitia import almost_abelian as aa
from hermitia import corpus
from hermitia.hermitian import HermitianStructure

# criterion number -> printed pass/fail line, filled by test_acceptance
ACCEPTANCE_LINES: dict[int, str] = {}

CORPUS_URIS = [f"corpus:{n}" for n in corpus.names()] + [
    "corpus:calabi_eckmann?t=0.5",
    "corpus:calabi_eckmann?t=0.3+0.2j",
    "corpus:nilpotent_8d?l1=2&l2=3&a=1",
]


def corpus_structures() -> list[tuple[str, HermitianStructure]]:
    return [(u, corpus.resolve(u)[1]) for u in CORPUS_URIS]


def random_compatible_metric(rng: np.random.Generator, J: np.ndarray, base: np.ndarray | None = None,
                             scale: float = 0.5) -> np.ndarray:
    dim = J.shape[0]
    base = np.eye(dim) if base is None else base
    P = scale * rng.normal(size=(dim, dim))
    S = base + P @ P.T
    return 0.5 * (S + J.T @ S @ J)


def random_integrable_structures(rng: np.random.Generator, count: int) -> list[HermitianStructure]:
    """Alternates random metrics on small corpus algebras with random almost abelian data."""
    pool = [corpus.resolve(f"corpus:{n}")[1] for n in ("kodaira", "hopf", "calabi_eckmann", "flat_torus_2")]
    out = []
    for i in range(count):
        if i % 2 == 0:
            H = pool[(i // 2) % len(pool)]
            out.append(H.with_metric(random_compatible_metric(rng, H.J, H.g)))
        else:
            spec = aa.random_spec(rng, 2 + (i // 2) % 2, skew=bool(i % 4 == 1))
            out.append(aa.build(spec))
    return out
