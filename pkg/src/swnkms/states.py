"""KMS states: thermal traces, the vacuum, mixtures, and the recursion oracle.

A covariant KMS state at inverse temperature beta is determined by a point
mass m1 at the bottom (vacuum component) plus a probability measure on the
positive half-line (Gibbs components); ``SpectralMeasure`` is the finite-atom
realization.  Two independent evaluators are provided:

* ``eval_trace`` -- truncated trace against the diagonal density
  e^{-beta H/2}/Z in the lowest-weight module (the matrix route);
* ``eval_kms_recursion`` -- the iterated KMS identity
  rho(X A N_F) = sum_{j>=1} e^{-beta j} rho([A, X] N_{T_{-2j}F}),
  run down to Cartan moments of the restricted measure (no matrices).

Their agreement on weight-zero monomials is the desk-scale content of the
uniqueness argument; the acceptance suite pins it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import algebra
from .algebra import AlgebraElement
from .funcspace import FunctionExpr
from .reps import ladder_diagonal

MASS_TOL = 1e-12

# Position merge tolerance for ladder atoms landing on the same point from
# different base atoms (spacing-2 overlaps).
POSITION_ATOL = 1e-9


class ConvergenceError(RuntimeError):
    """A truncated series failed to meet its tolerance within the cap."""


# -- measures -------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralMeasure:
    """m1 * delta_0 plus weighted atoms on (0, inf): the data classifying a state.

    Duplicate atom positions are merged by summing weights; the total mass
    m1 + sum w_k must be 1 within 1e-12.
    """

    m1: float
    atoms: tuple[tuple[float, float], ...]

    def __init__(self, m1: float, atoms=()):
        m1 = float(m1)
        merged: list[list[float]] = []
        for lam, w in sorted((float(l), float(w)) for l, w in atoms):
            if w < 0:
                raise ValueError(f"atom weight must be nonnegative, got {w}")
            if w == 0.0:
                continue
            if lam <= 0:
                raise ValueError(f"atom location must be positive, got {lam}")
            if merged and abs(lam - merged[-1][0]) <= 1e-12 * max(1.0, lam):
                merged[-1][1] += w
            else:
                merged.append([lam, w])
        total = m1 + sum(w for _, w in merged)
        if not (-MASS_TOL <= m1 <= 1 + MASS_TOL):
            raise ValueError(f"m1 must lie in [0, 1], got {m1}")
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"total mass must be 1, got {total}")
        object.__setattr__(self, "m1", m1)
        object.__setattr__(self, "atoms", tuple((l, w) for l, w in merged))

    @property
    def max_lambda(self) -> float:
        return max((lam for lam, _ in self.atoms), default=0.0)


@dataclass(frozen=True)
class CartanMeasure:
    """Finite probability measure on the real line, with optional mass at 0."""

    atoms: tuple[tuple[float, float], ...]
    m0: float = 0.0

    def __init__(self, atoms=(), m0: float = 0.0):
        m0 = float(m0)
        if m0 < 0:
            raise ValueError(f"m0 must be nonnegative, got {m0}")
        cleaned = []
        for x, mass in sorted((float(x), float(m)) for x, m in atoms):
            if mass < 0:
                raise ValueError(f"atom mass must be nonnegative, got {mass}")
            if cleaned and x == cleaned[-1][0]:
                cleaned[-1][1] += mass
            else:
                cleaned.append([x, mass])
        total = m0 + sum(m for _, m in cleaned)
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"total mass must be 1, got {total}")
        object.__setattr__(self, "atoms", tuple((x, m) for x, m in cleaned))
        object.__setattr__(self, "m0", m0)


# -- states ---------------------------------------------------------------------

VACUUM = "vacuum"
GIBBS = "gibbs"
MIXTURE = "mixture"


@dataclass(frozen=True)
class StateSpec:
    """A covariant KMS state: Vacuum, Gibbs(lambda), or Mixture(measure)."""

    beta: float
    kind: str
    lam: float | None = None
    measure: SpectralMeasure | None = None

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.kind == GIBBS:
            if self.lam is None or self.lam <= 0:
                raise ValueError(f"Gibbs state needs lambda > 0, got {self.lam}")
        elif self.kind == MIXTURE:
            if self.measure is None:
                raise ValueError("mixture state needs a SpectralMeasure")
        elif self.kind != VACUUM:
            raise ValueError(f"unknown state kind {self.kind!r}")

    @classmethod
    def vacuum(cls, beta: float) -> "StateSpec":
        return cls(beta=beta, kind=VACUUM)

    @classmethod
    def gibbs(cls, lam: float, beta: float) -> "StateSpec":
        return cls(beta=beta, kind=GIBBS, lam=float(lam))

    @classmethod
    def mixture(cls, measure: SpectralMeasure, beta: float) -> "StateSpec":
        return cls(beta=beta, kind=MIXTURE, measure=measure)

    def as_measure(self) -> SpectralMeasure:
        """The Gibbs(lambda) spelling equals Mixture(m1=0, [(lambda, 1)])."""
        if self.kind == VACUUM:
            return SpectralMeasure(1.0, ())
        if self.kind == GIBBS:
            return SpectralMeasure(0.0, ((self.lam, 1.0),))
        return self.measure


def state_to_dict(state: StateSpec) -> dict:
    out: dict = {"beta": state.beta, "kind": state.kind}
    if state.kind == GIBBS:
        out["lambda"] = state.lam
    elif state.kind == MIXTURE:
        out["m1"] = state.measure.m1
        out["atoms"] = [{"lambda": lam, "w": w} for lam, w in state.measure.atoms]
    return out


def state_from_dict(data: dict) -> StateSpec:
    kind = data.get("kind")
    beta = data.get("beta")
    if not isinstance(beta, (int, float)):
        raise ValueError("state file needs a numeric 'beta'")
    if kind == VACUUM:
        return StateSpec.vacuum(beta)
    if kind == GIBBS:
        return StateSpec.gibbs(data["lambda"], beta)
    if kind == MIXTURE:
        atoms = tuple((a["lambda"], a["w"]) for a in data.get("atoms", ()))
        return StateSpec.mixture(SpectralMeasure(data.get("m1", 0.0), atoms), beta)
    raise ValueError(f"unknown state kind {kind!r}")


def load_state(path) -> StateSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return state_from_dict(json.load(fh))


def save_state(state: StateSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_dict(state), fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- trace evaluator --------------------------------------------------------------


def _growth_exponent(a: AlgebraElement) -> int:
    return max((m + n + max(f.degree, 0) for (m, n), f in a.terms), default=0)


def _auto_dim(lam: float, beta: float, tol: float, growth: int) -> int:
    """Smallest power-of-two dimension with e^{-beta D/2} (lam+2D)^G below tol.

    The e^{-beta D/2} margin (the density decays like e^{-beta p}) absorbs the
    constants in the polynomial tail bound.
    """
    target = min(tol, 1e-12)
    dim = 64
    while math.exp(-beta * dim / 2.0) * (lam + 2.0 * dim) ** max(growth, 0) > target:
        dim *= 2
        if dim > (1 << 16):
            raise ConvergenceError(
                f"trace truncation cannot reach tol={tol} (beta={beta} too small?)"
            )
    return dim


def _gibbs_trace(lam: float, beta: float, a: AlgebraElement, tol: float) -> complex:
    dim = _auto_dim(lam, beta, tol, _growth_exponent(a))
    q = math.exp(-beta)
    weights = q ** np.arange(dim, dtype=float)
    z = weights.sum()
    eigens = lam + 2.0 * np.arange(dim, dtype=float)
    total = 0j
    for (m, n), f in a.terms:
        if m != n:
            continue  # single-band matrix: off-weight monomials are traceless
        diag = ladder_diagonal(lam, dim, m)
        total += np.sum(diag * f.evaluate_array(eigens) * weights)
    return complex(total / z)


def eval_trace(state: StateSpec, a: AlgebraElement, tol: float = 1e-10) -> complex:
    """State value by truncated trace (vacuum term is F(0) on the Cartan part)."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    measure = state.as_measure()
    total = 0j
    if measure.m1:
        total += measure.m1 * a.cartan_part(0, 0)(0.0)
    for lam, w in measure.atoms:
        total += w * _gibbs_trace(lam, state.beta, a, tol)
    return total


# -- characteristic functional ----------------------------------------------------


def chi_closed_form(state: StateSpec, t):
    """chi(t) = m1 + sum_k w_k e^{it lam_k} (1-e^{-beta}) / (1-e^{-beta+2it}).

    Accepts a scalar or an array of t values.
    """
    measure = state.as_measure()
    q = math.exp(-state.beta)
    ts = np.asarray(t, dtype=float)
    out = np.full(ts.shape, measure.m1, dtype=complex)
    geom = (1.0 - q) / (1.0 - q * np.exp(2j * ts))
    for lam, w in measure.atoms:
        out = out + w * np.exp(1j * ts * lam) * geom
    if np.isscalar(t) or getattr(t, "shape", None) == ():
        return complex(out)
    return out


# -- Cartan restriction and moments -------------------------------------------------


def ladder_depth(beta: float, tol: float = 1e-13, lam_max: float = 0.0, growth: int = 0) -> int:
    """Depth P making the dropped geometric tail (with polynomial factor) < tol."""
    q = math.exp(-beta)
    depth = 64
    while 4.0 * (lam_max + 2.0 * depth) ** max(growth, 0) * q**depth / (1.0 - q) > tol:
        depth *= 2
        if depth > (1 << 20):
            raise ConvergenceError(
                f"ladder truncation cannot reach tol={tol} (beta={beta} too small?)"
            )
    return depth


def cartan_restriction(state: StateSpec, max_p: int | None = None) -> CartanMeasure:
    """The state's measure on the Cartan subalgebra, truncated at max_p rungs.

    Each Gibbs component contributes the geometric ladder
    (1-q) q^p at lam + 2p; the truncated ladder is renormalized by
    1/(1 - q^{max_p+1}) so each component keeps its full weight.  Positions
    from different ladders closer than 1e-9 are merged.
    """
    measure = state.as_measure()
    if max_p is None:
        max_p = ladder_depth(state.beta, lam_max=measure.max_lambda)
    q = math.exp(-state.beta)
    ps = np.arange(max_p + 1, dtype=float)
    rung_masses = (1.0 - q) * q**ps
    rung_masses /= rung_masses.sum()  # exact renormalization of the cut tail
    collected: list[tuple[float, float]] = []
    for lam, w in measure.atoms:
        positions = lam + 2.0 * ps
        collected.extend(zip(positions.tolist(), (w * rung_masses).tolist()))
    collected.sort()
    merged: list[list[float]] = []
    for x, mass in collected:
        if merged and abs(x - merged[-1][0]) <= POSITION_ATOL:
            merged[-1][1] += mass
        else:
            merged.append([x, mass])
    return CartanMeasure(atoms=tuple((x, m) for x, m in merged), m0=measure.m1)


def cartan_moment(measure: CartanMeasure, f: FunctionExpr) -> complex:
    """Integral of F against the measure: sum mass_k F(x_k) + m0 F(0)."""
    total = 0j
    if measure.m0:
        total += measure.m0 * f(0.0)
    if measure.atoms:
        xs = np.array([x for x, _ in measure.atoms])
        ms = np.array([m for _, m in measure.atoms])
        total += complex(np.sum(ms * f.evaluate_array(xs)))
    return total


# -- the uniqueness recursion -------------------------------------------------------


@lru_cache(maxsize=None)
def _recursion_commutator(m: int, n: int) -> AlgebraElement:
    """[X^{m-1} Y^n, X]: strictly lower total degree than X^m Y^n."""
    return algebra.commutator(AlgebraElement.monomial(m - 1, n), algebra.X)


def eval_kms_recursion(
    measure: SpectralMeasure,
    beta: float,
    a: AlgebraElement,
    tol: float = 1e-10,
    max_j: int = 10000,
) -> complex:
    """Evaluate the unique covariant KMS extension without matrices.

    Off-weight monomials vanish by covariance.  For m = n >= 1 the iterated
    KMS identity gives rho(X^m Y^m N_F) = sum_{j>=1} e^{-beta j}
    rho([X^{m-1}Y^m, X] N_{T_{-2j}F}); the j-series is summed numerically,
    truncated once its geometric tail bound (measured decay ratio, floored at
    e^{-beta}) drops below tol relative to the series' own sup-scale on the
    support.  The base case is a Cartan moment of the restricted measure.
    Raises ConvergenceError if the series needs more than max_j terms.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    q = math.exp(-beta)
    growth = _growth_exponent(a)
    depth = ladder_depth(beta, min(tol * 1e-2, 1e-13), measure.max_lambda, growth)
    restriction = cartan_restriction(
        StateSpec.mixture(measure, beta) if measure.atoms else StateSpec.vacuum(beta),
        max_p=depth,
    )
    xs = np.array([x for x, _ in restriction.atoms])
    masses = np.array([m for _, m in restriction.atoms])
    support = np.concatenate(([0.0], xs))

    def moment(f: FunctionExpr) -> complex:
        total = restriction.m0 * f(0.0)
        if xs.size:
            total += complex(np.sum(masses * f.evaluate_array(xs)))
        return total

    # The tail of the j-series enters the final value through moments of the
    # commutator's polynomial factors, which can amplify it by a few orders;
    # the extra 1e-3 margin buys that back at O(log(1/margin)/beta) terms.
    series_tol = tol * 1e-3

    def shift_series(f: FunctionExpr) -> FunctionExpr:
        # G = sum_{j>=1} q^j T_{-2j} f, truncated with a geometric tail bound.
        if f.is_zero:
            return f
        total = FunctionExpr.zero()
        sup_scale = 0.0
        prev_sup = None
        j = 0
        while True:
            j += 1
            if j > max_j:
                raise ConvergenceError(
                    f"KMS series needs more than {max_j} terms (tol={tol}, beta={beta})"
                )
            qj = q**j
            total = total + qj * f.shift(-2.0 * j)
            sup_j = qj * float(np.max(np.abs(f.evaluate_array(support + 2.0 * j))))
            sup_scale = max(sup_scale, sup_j)
            if prev_sup is not None and prev_sup > 0.0:
                ratio = max(q, sup_j / prev_sup)
                if ratio < 0.97 and sup_j * ratio / (1.0 - ratio) <= series_tol * (
                    1e-300 + sup_scale
                ):
                    return total
            if sup_j == 0.0 and (prev_sup == 0.0 or prev_sup is None):
                return total
            prev_sup = sup_j

    def ev(elem: AlgebraElement) -> complex:
        total = 0j
        for (m, n), f in elem.terms:
            if m != n:
                continue  # covariance
            if m == 0:
                total += moment(f)
                continue
            series = shift_series(f)
            bracket = _recursion_commutator(m, n)
            total += ev(
                AlgebraElement([(key, p * series) for key, p in bracket.terms])
            )
        return total

    return ev(a)
