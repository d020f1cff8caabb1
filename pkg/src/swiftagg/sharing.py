"""Masking polynomials and Shamir-style vector shares.

Each user hides its model as the constant term of a polynomial whose higher
coefficients are uniform noise vectors; peers only ever see evaluations at
nonzero points.  Noise is drawn by rejection sampling from a seeded PRNG so
that shares are exactly uniform (the privacy oracle counts on this) and runs
are reproducible.
"""

from __future__ import annotations

import hashlib
import random
from typing import Sequence

from .errors import (
    ArityMismatchError,
    LengthMismatchError,
    MixedFieldError,
    ZeroEvaluationPointError,
)
from .field import (
    EvalPoint,
    FieldElement,
    FieldSpec,
    ModelVector,
    lagrange_interpolate_at_zero,
)


def derive_subseed(seed: int, label) -> int:
    """Stable 64-bit subseed for (run seed, label) pairs."""
    digest = hashlib.sha256(f"{seed}/{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def user_rng(seed: int, user_id: int) -> random.Random:
    """Per-user generator so one user's noise never depends on another's."""
    return random.Random(derive_subseed(seed, f"user-{user_id}"))


def uniform_element(field: FieldSpec, rng: random.Random) -> int:
    """Uniform draw from [0, p) by rejection; exact, not modulo-biased."""
    p = field.p
    bits = p.bit_length()
    while True:
        v = rng.getrandbits(bits)
        if v < p:
            return v


def sample_noise(field: FieldSpec, count: int, length: int, rng: random.Random):
    """Draw ``count`` uniform masking vectors of ``length`` entries."""
    return tuple(
        ModelVector._raw(field, tuple(uniform_element(field, rng) for _ in range(length)))
        for _ in range(count)
    )


class SharePolynomial:
    """Coefficients [model, noise_1, ..., noise_T]; evaluates exactly.

    Coefficient coherence (one field, one length) is checked once here, so
    evaluation can run a bare Horner loop; shares are the hot path of every
    simulated run and of the exhaustive privacy enumeration.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[ModelVector]):
        coeffs = tuple(coeffs)
        if len(coeffs) < 1:
            raise ValueError("polynomial needs at least the constant term")
        field = coeffs[0].field
        length = len(coeffs[0].values)
        for c in coeffs[1:]:
            if c.field.p != field.p:
                raise MixedFieldError("coefficient vectors lie in different fields")
            if len(c.values) != length:
                raise LengthMismatchError("coefficient vectors differ in length")
        self.coeffs = coeffs

    @property
    def model(self) -> ModelVector:
        return self.coeffs[0]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def eval(self, x) -> ModelVector:
        field = self.coeffs[0].field
        p = field.p
        if isinstance(x, EvalPoint):
            xv = x.alpha
        elif isinstance(x, FieldElement):
            xv = x.value
        else:
            xv = int(x) % p
        acc = self.coeffs[-1].values
        for c in reversed(self.coeffs[:-1]):
            acc = tuple((a * xv + b) % p for a, b in zip(acc, c.values))
        return ModelVector._raw(field, acc)


def build_polynomial(model: ModelVector, noise, collusion_bound: int) -> SharePolynomial:
    """Mask ``model`` with exactly ``collusion_bound`` noise vectors.

    The constant term is the model itself, so evaluating at 0 returns it;
    shares are therefore only ever taken at nonzero points.
    """
    noise = tuple(noise)
    if len(noise) != collusion_bound:
        raise ArityMismatchError(
            f"expected {collusion_bound} noise vectors, got {len(noise)}"
        )
    for z in noise:
        if z.field.p != model.field.p or len(z.values) != len(model.values):
            raise ArityMismatchError("noise vectors must match the model's field and length")
    return SharePolynomial((model,) + noise)


def share_for(poly: SharePolynomial, point) -> ModelVector:
    """Evaluate ``poly`` at a nonzero point; the share sent to that point's owner."""
    p = poly.coeffs[0].field.p
    if isinstance(point, EvalPoint):
        alpha = point.alpha % p  # EvalPoint guarantees nonzero in its own field
        if alpha == 0:
            raise ZeroEvaluationPointError("share point must be nonzero")
    else:
        alpha = int(point) % p
        if alpha == 0:
            raise ZeroEvaluationPointError("share point must be nonzero")
    return poly.eval(alpha)


def reconstruct_aggregate(uploads, collusion_bound: int) -> ModelVector:
    """Interpolate the uploads at x = 0: the field sum of contributing models.

    ``uploads`` is a sequence of (point, ModelVector) pairs with distinct
    nonzero points; at least ``collusion_bound + 1`` are required.  Surplus
    uploads are consistency-checked, so a diverging sequence shows up as an
    error rather than a wrong sum.
    """
    return lagrange_interpolate_at_zero(uploads, collusion_bound)
