"""Symbolic functions of one real variable: finite sums of c * x^n * e^{i t x}.

This span is closed under pointwise product, translation and complex
conjugation, which is exactly what the commutation relations of the operator
algebra consume.  Instances are immutable and hashable; all operations return
new objects.
"""

from __future__ import annotations

import cmath
from math import comb

import numpy as np

# Relative magnitude below which a coefficient is treated as zero when
# canonicalizing (keeps equality robust after binomial expansions).
COEFF_DROP = 1e-14


def _canonical(terms) -> tuple[tuple[int, float, complex], ...]:
    acc: dict[tuple[int, float], complex] = {}
    for n, t, c in terms:
        n = int(n)
        if n < 0:
            raise ValueError(f"power must be nonnegative, got {n}")
        t = float(t) + 0.0  # normalize -0.0
        c = complex(c)
        key = (n, t)
        acc[key] = acc.get(key, 0j) + c
    if not acc:
        return ()
    cmax = max(abs(c) for c in acc.values())
    if cmax == 0.0:
        return ()
    kept = [(n, t, c) for (n, t), c in acc.items() if abs(c) > COEFF_DROP * cmax]
    kept.sort(key=lambda item: (item[0], item[1]))
    return tuple(kept)


class FunctionExpr:
    """A finite sum sum_k c_k * x^{n_k} * e^{i t_k x}.

    Terms are kept canonical: sorted by (power, frequency), duplicate keys
    merged, relatively-negligible coefficients dropped.  Frequencies are
    compared bit-exactly; translation never perturbs them.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        self.terms: tuple[tuple[int, float, complex], ...] = _canonical(terms)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "FunctionExpr":
        return cls()

    @classmethod
    def constant(cls, c) -> "FunctionExpr":
        return cls([(0, 0.0, c)])

    @classmethod
    def x_power(cls, n: int = 1, coeff=1.0) -> "FunctionExpr":
        return cls([(n, 0.0, coeff)])

    @classmethod
    def exponential(cls, t: float, coeff=1.0) -> "FunctionExpr":
        """e^{i t x}, optionally scaled."""
        return cls([(0, float(t), coeff)])

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_one(self) -> bool:
        return self.terms == ((0, 0.0, 1 + 0j),)

    @property
    def degree(self) -> int:
        """Largest power of x present (-1 for the zero function)."""
        return max((n for n, _, _ in self.terms), default=-1)

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(sorted({t for _, t, _ in self.terms}))

    def coeff_l1(self) -> float:
        return sum(abs(c) for _, _, c in self.terms)

    # -- algebra -----------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return FunctionExpr(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return FunctionExpr([(n, t, -c) for n, t, c in self.terms])

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return FunctionExpr([(n, t, c * other) for n, t, c in self.terms])
        if isinstance(other, FunctionExpr):
            prod = []
            for n1, t1, c1 in self.terms:
                for n2, t2, c2 in other.terms:
                    prod.append((n1 + n2, t1 + t2, c1 * c2))
            return FunctionExpr(prod)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers not representable")
        out = FunctionExpr.constant(1.0)
        for _ in range(k):
            out = out * self
        return out

    def shift(self, a: float) -> "FunctionExpr":
        """The translate T_a: (T_a F)(x) = F(x - a).

        Powers expand binomially, exponentials pick up the phase e^{-i t a}.
        """
        a = float(a)
        if a == 0.0:
            return self
        out = []
        for n, t, c in self.terms:
            phase = c * cmath.exp(-1j * t * a)
            for k in range(n + 1):
                out.append((k, t, phase * comb(n, k) * (-a) ** (n - k)))
        return FunctionExpr(out)

    def conjugate(self) -> "FunctionExpr":
        """Pointwise complex conjugate; an involution on the span."""
        return FunctionExpr([(n, -t, c.conjugate()) for n, t, c in self.terms])

    # -- evaluation --------------------------------------------------------

    def __call__(self, x0: float) -> complex:
        x0 = float(x0)
        return sum(
            (c * x0**n * cmath.exp(1j * t * x0) for n, t, c in self.terms), 0j
        )

    def evaluate_array(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on a real grid."""
        xs = np.asarray(xs, dtype=float)
        out = np.zeros(xs.shape, dtype=complex)
        for n, t, c in self.terms:
            out += c * xs**n * np.exp(1j * t * xs)
        return out

    # -- comparison / hashing ----------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, FunctionExpr):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def isclose(self, other: "FunctionExpr", tol: float = 1e-12) -> bool:
        """Coefficient-wise comparison relative to the larger coefficient scale."""
        scale = max(self.coeff_l1(), other.coeff_l1(), 1.0)
        diff = self - other
        return all(abs(c) <= tol * scale for _, _, c in diff.terms)

    def __repr__(self):
        from .grammar import format_function

        return f"FunctionExpr({format_function(self)!r})"


def _coerce(value):
    if isinstance(value, FunctionExpr):
        return value
    if isinstance(value, (int, float, complex)):
        return FunctionExpr.constant(value)
    return NotImplemented


#: The function F(x) = 1.
ONE = FunctionExpr.constant(1.0)

#: The coordinate function F(x) = x (the Cartan generator's symbol).
X_VAR = FunctionExpr.x_power(1)
