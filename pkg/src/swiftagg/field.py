"""Exact arithmetic in a prime field, vectors over it, and Lagrange interpolation.

Everything here is plain integer math reduced mod p: no floats, no silent
wraparound, no probabilistic shortcuts.  The rest of the package builds its
sharing and recovery steps on these primitives, so all of them are exact by
construction.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .errors import (
    ConsistencyError,
    DuplicateAbscissaError,
    InsufficientPointsError,
    LengthMismatchError,
    MixedFieldError,
    ZeroEvaluationPointError,
)

# Primality is checked by trial division, which stays cheap below this bound.
# 2**31 - 1 (the largest modulus used in the test matrix) is well inside it.
MAX_MODULUS = 1 << 32


def _check_prime(p: int) -> None:
    if p < 2:
        raise ValueError(f"modulus must be >= 2, got {p}")
    if p >= MAX_MODULUS:
        raise ValueError(f"modulus must be below 2**32, got {p}")
    if p in (2, 3):
        return
    if p % 2 == 0:
        raise ValueError(f"modulus {p} is not prime")
    i = 3
    while i * i <= p:
        if p % i == 0:
            raise ValueError(f"modulus {p} is not prime")
        i += 2


class FieldSpec:
    """The prime field F_p.  Two specs are interchangeable iff p matches."""

    __slots__ = ("p",)

    def __init__(self, p: int):
        _check_prime(p)
        self.p = p

    def element(self, value: int) -> "FieldElement":
        return FieldElement(self, value)

    def vector(self, values: Iterable[int]) -> "ModelVector":
        return ModelVector(self, values)

    def zeros(self, length: int) -> "ModelVector":
        return ModelVector._raw(self, (0,) * length)

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and self.p == other.p

    def __hash__(self):
        return hash(("FieldSpec", self.p))

    def __repr__(self):
        return f"FieldSpec({self.p})"


def _require_same_field(a: FieldSpec, b: FieldSpec) -> None:
    if a.p != b.p:
        raise MixedFieldError(f"operands live in F_{a.p} and F_{b.p}")


class FieldElement:
    """A value in [0, p) tied to its FieldSpec."""

    __slots__ = ("field", "value")

    def __init__(self, field: FieldSpec, value: int):
        self.field = field
        self.value = int(value) % field.p

    def __add__(self, other: "FieldElement") -> "FieldElement":
        _require_same_field(self.field, other.field)
        return FieldElement(self.field, self.value + other.value)

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        _require_same_field(self.field, other.field)
        return FieldElement(self.field, self.value - other.value)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        _require_same_field(self.field, other.field)
        return FieldElement(self.field, self.value * other.value)

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.field, -self.value)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("no multiplicative inverse of 0")
        return FieldElement(self.field, pow(self.value, -1, self.field.p))

    def __eq__(self, other):
        return (
            isinstance(other, FieldElement)
            and self.field.p == other.field.p
            and self.value == other.value
        )

    def __hash__(self):
        return hash((self.field.p, self.value))

    def __repr__(self):
        return f"{self.value} (mod {self.field.p})"


def field_add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def field_sub(a: FieldElement, b: FieldElement) -> FieldElement:
    return a - b


def field_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def field_inv(a: FieldElement) -> FieldElement:
    return a.inverse()


class ModelVector:
    """A fixed-length vector over one prime field.

    Entries are stored as plain ints in [0, p); the length and field are
    immutable after construction.
    """

    __slots__ = ("field", "values")

    def __init__(self, field: FieldSpec, values: Iterable[int]):
        vals = tuple(int(v) % field.p for v in values)
        if not vals:
            raise ValueError("vector must have length >= 1")
        self.field = field
        self.values = vals

    @classmethod
    def _raw(cls, field: FieldSpec, values: tuple) -> "ModelVector":
        # Fast path for internally produced, already-reduced tuples.
        vec = object.__new__(cls)
        vec.field = field
        vec.values = values
        return vec

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i: int) -> FieldElement:
        return FieldElement(self.field, self.values[i])

    def __add__(self, other: "ModelVector") -> "ModelVector":
        return vec_add(self, other)

    def __eq__(self, other):
        return (
            isinstance(other, ModelVector)
            and self.field.p == other.field.p
            and self.values == other.values
        )

    def __hash__(self):
        return hash((self.field.p, self.values))

    def __repr__(self):
        return f"ModelVector({list(self.values)} mod {self.field.p})"


def vec_add(a: ModelVector, b: ModelVector) -> ModelVector:
    _require_same_field(a.field, b.field)
    if len(a.values) != len(b.values):
        raise LengthMismatchError(f"lengths {len(a.values)} and {len(b.values)}")
    p = a.field.p
    return ModelVector._raw(a.field, tuple((x + y) % p for x, y in zip(a.values, b.values)))


class EvalPoint:
    """A nonzero abscissa; x = 0 holds the secret and is never a share point."""

    __slots__ = ("field", "alpha")

    def __init__(self, field: FieldSpec, alpha: int):
        value = int(alpha) % field.p
        if value == 0:
            raise ZeroEvaluationPointError("evaluation point must be nonzero")
        self.field = field
        self.alpha = value

    def __eq__(self, other):
        return (
            isinstance(other, EvalPoint)
            and self.field.p == other.field.p
            and self.alpha == other.alpha
        )

    def __hash__(self):
        return hash((self.field.p, self.alpha))

    def __repr__(self):
        return f"EvalPoint({self.alpha} mod {self.field.p})"


def _as_abscissa(x, field: FieldSpec) -> int:
    """Accept EvalPoint, FieldElement or int and return a reduced int."""
    if isinstance(x, EvalPoint):
        _require_same_field(x.field, field)
        return x.alpha
    if isinstance(x, FieldElement):
        _require_same_field(x.field, field)
        return x.value
    return int(x) % field.p


def poly_eval(coeffs: Sequence[ModelVector], x) -> ModelVector:
    """Evaluate a vector-coefficient polynomial at ``x`` by Horner's rule."""
    if not coeffs:
        raise ValueError("coefficient list must be nonempty")
    field = coeffs[0].field
    length = len(coeffs[0].values)
    for c in coeffs[1:]:
        _require_same_field(c.field, field)
        if len(c.values) != length:
            raise LengthMismatchError("coefficient vectors differ in length")
    p = field.p
    xv = _as_abscissa(x, field)
    acc = coeffs[-1].values
    for c in reversed(coeffs[:-1]):
        acc = tuple((a * xv + b) % p for a, b in zip(acc, c.values))
    return ModelVector._raw(field, acc)


def _interpolant_at(points: Sequence[tuple], x: int, field: FieldSpec) -> tuple:
    """Value tuple of the Lagrange interpolant through ``points`` at ``x``."""
    p = field.p
    length = len(points[0][1].values)
    acc = [0] * length
    for i, (alpha_i, y_i) in enumerate(points):
        num = 1
        den = 1
        for j, (alpha_j, _) in enumerate(points):
            if i == j:
                continue
            num = num * (x - alpha_j) % p
            den = den * (alpha_i - alpha_j) % p
        w = num * pow(den, -1, p) % p
        for k, y in enumerate(y_i.values):
            acc[k] = (acc[k] + w * y) % p
    return tuple(acc)


def lagrange_interpolate_at_zero(points, degree_bound: int) -> ModelVector:
    """Recover P(0) for the degree-<=``degree_bound`` polynomial through ``points``.

    ``points`` is a sequence of (abscissa, ModelVector) pairs; abscissas may
    be EvalPoint, FieldElement or int, must be nonzero and pairwise distinct.
    The interpolant is fitted to the first ``degree_bound + 1`` points; any
    surplus points are checked against it so that disagreeing inputs surface
    as a ConsistencyError instead of being silently ignored.
    """
    if degree_bound < 0:
        raise ValueError("degree bound must be >= 0")
    pts = list(points)
    if not pts:
        raise InsufficientPointsError("no points supplied")
    field = pts[0][1].field
    length = len(pts[0][1].values)
    norm = []
    seen = set()
    for x, y in pts:
        _require_same_field(y.field, field)
        if len(y.values) != length:
            raise LengthMismatchError("point values differ in length")
        alpha = _as_abscissa(x, field)
        if alpha == 0:
            raise ZeroEvaluationPointError("interpolation abscissa must be nonzero")
        if alpha in seen:
            raise DuplicateAbscissaError(f"abscissa {alpha} appears twice")
        seen.add(alpha)
        norm.append((alpha, y))

    need = degree_bound + 1
    if len(norm) < need:
        raise InsufficientPointsError(
            f"need {need} points for degree {degree_bound}, got {len(norm)}"
        )
    base = norm[:need]
    for alpha, y in norm[need:]:
        if _interpolant_at(base, alpha, field) != y.values:
            raise ConsistencyError(
                f"point at x={alpha} disagrees with the degree-{degree_bound} interpolant"
            )
    return ModelVector._raw(field, _interpolant_at(base, 0, field))
