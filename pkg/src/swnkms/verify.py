"""Property checks: the KMS identity, Gram positivity, measure support.

``kms_check`` draws seeded random element pairs and measures the relative
residual of rho(AB) = rho(B U_{i beta}(A)) through the trace evaluator.  The
pair set depends only on (seed, degree, trials), so reports are replayable
and bit-reproducible; a ``dynamics_scale`` hook deliberately mis-scales the
analytic continuation so the suite can prove the checker is able to fail.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .algebra import AlgebraElement
from .funcspace import FunctionExpr
from .grammar import format_element
from .states import CartanMeasure, StateSpec, cartan_restriction, eval_trace


@dataclass(frozen=True)
class KmsReport:
    pairs_tested: int
    max_residual: float
    worst_pair: tuple[str, str]
    tolerance: float
    seed: int

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "pairs_tested": self.pairs_tested,
            "max_residual": self.max_residual,
            "worst_pair": list(self.worst_pair),
            "tolerance": self.tolerance,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def random_function(rng: np.random.Generator) -> FunctionExpr:
    terms = []
    for _ in range(rng.integers(1, 3)):
        power = int(rng.integers(0, 3))
        freq = float(rng.uniform(-1.0, 1.0)) if rng.random() < 0.5 else 0.0
        coeff = complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
        terms.append((power, freq, coeff))
    f = FunctionExpr(terms)
    return f if not f.is_zero else FunctionExpr.constant(1.0)


def random_element(rng: np.random.Generator, max_degree: int) -> AlgebraElement:
    keys = [
        (m, n)
        for m in range(max_degree + 1)
        for n in range(max_degree + 1)
        if m + n <= max_degree
    ]
    terms = []
    for _ in range(rng.integers(1, 4)):
        m, n = keys[rng.integers(0, len(keys))]
        terms.append(((m, n), random_function(rng)))
    el = AlgebraElement(terms)
    return el if not el.is_zero else AlgebraElement.one()


@lru_cache(maxsize=8)
def _trial_pairs(seed: int, max_degree: int, trials: int):
    """Precompute, per pair: A, B, the product AB, and B*(weight component of A).

    rho(B U_{i beta}(A)) = sum_w e^{-beta w} rho(B A_w), so the beta-dependence
    factors out of the products and one pair set serves every state.
    """
    out = []
    for index in range(trials):
        rng = np.random.default_rng([seed, index])
        a = random_element(rng, max_degree)
        b = random_element(rng, max_degree)
        by_weight = []
        for w in a.weights:
            a_w = AlgebraElement(
                [(key, f) for key, f in a.terms if key[0] - key[1] == w]
            )
            by_weight.append((w, b * a_w))
        out.append((a, b, a * b, tuple(by_weight)))
    return tuple(out)


def kms_check(
    state: StateSpec,
    max_degree: int = 4,
    trials: int = 100,
    seed: int = 0,
    tol: float = 1e-8,
    dynamics_scale: float = 1.0,
    eval_tol: float = 1e-10,
) -> KmsReport:
    """Residuals |rho(AB) - rho(B U_{i beta}(A))| / (1 + |rho(AB)|) over random pairs.

    ``dynamics_scale`` multiplies beta inside U_{i beta} only (the negative
    control: scale 2 turns e^{-beta} into e^{-2 beta} and must blow the check).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    worst = ("", "")
    max_residual = 0.0
    for a, b, ab, by_weight in _trial_pairs(seed, max_degree, trials):
        lhs = eval_trace(state, ab, eval_tol)
        rhs = 0j
        for w, b_aw in by_weight:
            rhs += math.exp(-state.beta * dynamics_scale * w) * eval_trace(
                state, b_aw, eval_tol
            )
        residual = abs(lhs - rhs) / (1.0 + abs(lhs))
        if residual > max_residual:
            max_residual = residual
            worst = (format_element(a), format_element(b))
    return KmsReport(
        pairs_tested=trials,
        max_residual=max_residual,
        worst_pair=worst,
        tolerance=tol,
        seed=seed,
    )


class GramResult(NamedTuple):
    min_eigenvalue: float
    passed: bool


def gram_psd_check(
    state: StateSpec,
    words: list[AlgebraElement],
    tol: float = 1e-8,
    eval_tol: float = 1e-10,
) -> GramResult:
    """Smallest eigenvalue of G_ij = rho(w_i* w_j); pass iff >= -tol (1 + ||G||)."""
    if not words:
        raise ValueError("need at least one word")
    k = len(words)
    gram = np.zeros((k, k), dtype=complex)
    for i, wi in enumerate(words):
        wi_star = wi.star()
        for j, wj in enumerate(words):
            gram[i, j] = eval_trace(state, wi_star * wj, eval_tol)
    scale = 1.0 + float(np.max(np.abs(gram)))
    herm_defect = float(np.max(np.abs(gram - gram.conj().T)))
    if herm_defect > 1e-10 * scale:
        raise ValueError(f"Gram matrix not Hermitian: defect {herm_defect}")
    eigs = np.linalg.eigvalsh((gram + gram.conj().T) / 2.0)
    min_eig = float(eigs[0])
    norm = float(np.linalg.norm(gram, 2))
    return GramResult(min_eig, min_eig >= -tol * (1.0 + norm))


@dataclass(frozen=True)
class SupportReport:
    passed: bool
    offending_atom: float | None
    min_position: float


def support_positivity_check(
    target: StateSpec | CartanMeasure, atol: float = 1e-12
) -> SupportReport:
    """All Cartan mass must sit at x >= 0 (the spectrum-positivity conclusion)."""
    measure = target if isinstance(target, CartanMeasure) else cartan_restriction(target)
    positions = [x for x, mass in measure.atoms if mass > 0.0]
    if measure.m0 > 0.0:
        positions.append(0.0)
    min_pos = min(positions, default=0.0)
    offending = [x for x in positions if x < -atol]
    if offending:
        return SupportReport(False, min(offending), min_pos)
    return SupportReport(True, None, min_pos)
