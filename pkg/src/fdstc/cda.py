"""Quaternion algebras (L/K, sigma, gamma) with L = K(sqrt a).

Elements are x = c + u d with c, d in L and u^2 = gamma, u k = sigma(k) u.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import GammaNotNegative, RamifiedOrNonMonogenic, TestInconclusive
from .numfield import (FieldElement, NumberField, QuadraticExtElement, is_square_residue,
                       mult_order, residue_field)


@dataclass(frozen=True)
class DivisionCertificate:
    strategy: str
    q: int | None = None
    uniformizer: str = ""          # which of (a, gamma) has valuation one
    nonsquare: str = ""            # the element shown to be a nonsquare
    residue_degree: int | None = None
    witness_order: int | None = None
    group_order: int | None = None
    red_poly: tuple = ()
    detail: str = ""

    def summary(self) -> str:
        if self.strategy == "norm-form":
            return f"norm-form: {self.detail}"
        return (f"residue-nonsquare at q={self.q}: {self.nonsquare} has order {self.witness_order} "
                f"in F_{self.q}^{self.residue_degree} (group order {self.group_order}), "
                f"{self.uniformizer} has valuation 1")


@dataclass
class AlgebraSpec:
    """(a, gamma) over K. `center_radicand` = -m means the true center is K(sqrt(-m))."""
    base_field: NumberField
    a: int
    gamma: FieldElement
    center_radicand: int | None = None
    label: str = ""
    division_certificate: DivisionCertificate | None = field(default=None, compare=False)

    def __post_init__(self):
        self.gamma = self.base_field(self.gamma)
        if self.gamma.is_zero():
            raise ValueError("gamma must be nonzero")
        if self.a == 0:
            raise ValueError("a must be nonzero")

    def element(self, c, d) -> "AlgebraElement":
        return AlgebraElement(self, self._lift(c), self._lift(d))

    def _lift(self, v):
        if isinstance(v, QuadraticExtElement):
            return v
        if isinstance(v, tuple):
            return QuadraticExtElement(self.base_field(v[0]), self.base_field(v[1]), self.a)
        return QuadraticExtElement.lift(self.base_field(v), self.a)


class AlgebraElement:
    __slots__ = ("spec", "c", "d")

    def __init__(self, spec: AlgebraSpec, c: QuadraticExtElement, d: QuadraticExtElement):
        self.spec, self.c, self.d = spec, c, d

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        g = self.spec.gamma
        c = self.c * other.c + self.d.conj() * other.d * g
        d = self.d * other.c + self.c.conj() * other.d
        return AlgebraElement(self.spec, c, d)

    def __add__(self, other):
        return AlgebraElement(self.spec, self.c + other.c, self.d + other.d)

    def reduced_norm(self) -> FieldElement:
        """c sigma(c) - gamma d sigma(d), an element of K."""
        return self.c.norm() - self.spec.gamma * self.d.norm()

    def inverse(self) -> "AlgebraElement":
        n = self.reduced_norm().inverse()
        return AlgebraElement(self.spec, self.c.conj() * n, -(self.d * n))

    def is_zero(self):
        return self.c.is_zero() and self.d.is_zero()


@dataclass
class RepMatrix:
    """2x2 exact representation.

    With `sqrt_factor` r set, the numeric matrix is [[e00, -sqrt(r) e01], [sqrt(r) e10, e11]];
    otherwise it is the entries themselves.
    """
    entries: list
    sqrt_factor: FieldElement | None = None

    def det(self) -> QuadraticExtElement:
        e = self.entries
        if self.sqrt_factor is None:
            return e[0][0] * e[1][1] - e[0][1] * e[1][0]
        return e[0][0] * e[1][1] + e[0][1] * e[1][0] * self.sqrt_factor

    def numeric(self, i: int = 0) -> np.ndarray:
        m = np.array([[x.embed(i) for x in row] for row in self.entries], dtype=complex)
        if self.sqrt_factor is not None:
            s = math.sqrt(self.sqrt_factor.embed(i).real)
            m[0, 1] *= -s
            m[1, 0] *= s
        return m

    def __matmul__(self, other: "RepMatrix") -> "RepMatrix":
        if self.sqrt_factor is not None or other.sqrt_factor is not None:
            raise ValueError("exact products only for unbalanced representations")
        a, b = self.entries, other.entries
        return RepMatrix([[a[i][0] * b[0][j] + a[i][1] * b[1][j] for j in range(2)] for i in range(2)])

    def __eq__(self, other):
        return (all(self.entries[i][j] == other.entries[i][j] for i in range(2) for j in range(2))
                and self.sqrt_factor == other.sqrt_factor)


def lam(x: AlgebraElement) -> RepMatrix:
    """[[c, gamma sigma(d)], [d, sigma(c)]]."""
    g = x.spec.gamma
    return RepMatrix([[x.c, x.d.conj() * g], [x.d, x.c.conj()]])


def lam_tilde(x: AlgebraElement, i: int = 0) -> RepMatrix:
    """[[c, -sqrt(-gamma) sigma(d)], [sqrt(-gamma) d, sigma(c)]]."""
    g = x.spec.gamma.embed(i)
    if abs(g.imag) > 1e-12 or g.real >= 0:
        raise GammaNotNegative(f"gamma embeds to {g}")
    return RepMatrix([[x.c, x.d.conj()], [x.d, x.c.conj()]], sqrt_factor=-x.spec.gamma)


# ---------------------------------------------------------------------------

def _valuation(r: Fraction, q: int) -> int:
    v, num, den = 0, r.numerator, r.denominator
    while num and num % q == 0:
        num //= q
        v += 1
    while den % q == 0:
        den //= q
        v -= 1
    return v


def _norm_form(alg: AlgebraSpec) -> DivisionCertificate:
    K = alg.base_field
    if alg.center_radicand is not None:
        raise TestInconclusive("center is not totally real")
    if not K.is_totally_real():
        raise TestInconclusive("base field is not totally real")
    if alg.a >= 0:
        raise TestInconclusive("a is not negative")
    gs = alg.gamma.embeddings()
    if any(g.real >= 0 for g in gs):
        raise TestInconclusive("gamma is not totally negative")
    return DivisionCertificate(
        "norm-form",
        detail=f"a = {alg.a} < 0 and gamma < 0 at all {K.degree} real embeddings, so "
               "c0^2 - a c1^2 - gamma (d0^2 - a d1^2) is positive definite")


def _residue(alg: AlgebraSpec, q: int) -> DivisionCertificate:
    K = alg.base_field
    try:
        fields = residue_field(K, q)
    except RamifiedOrNonMonogenic as exc:
        raise TestInconclusive(str(exc)) from exc
    a_el = K(alg.a)
    roles = [("a", a_el, "gamma", alg.gamma), ("gamma", alg.gamma, "a", a_el)]
    reasons = []
    for uname, u, vname, v in roles:
        if not u.is_rational() or _valuation(u.to_rational(), q) != 1:
            reasons.append(f"{uname} lacks valuation one at {q}")
            continue
        for rf in fields:
            try:
                vr = rf.reduce(v)
            except ValueError:
                reasons.append(f"{vname} not integral at {q}")
                continue
            if vr.is_zero():
                reasons.append(f"{vname} vanishes mod the prime")
                continue
            if alg.center_radicand is not None:
                m = rf.reduce(K(alg.center_radicand))
                if m.is_zero() or not is_square_residue(m):
                    reasons.append("residue field of the center is larger")
                    continue
            if is_square_residue(vr):
                reasons.append(f"{vname} is a square in F_{q}^{rf.f}")
                continue
            return DivisionCertificate(
                "residue-nonsquare", q=q, uniformizer=uname, nonsquare=vname,
                residue_degree=rf.f, witness_order=mult_order(vr), group_order=rf.group_order,
                red_poly=rf.red_poly)
    raise TestInconclusive("; ".join(reasons))


def certify_division(alg: AlgebraSpec, strategy: str, q: int | None = None) -> DivisionCertificate:
    """Sufficient-condition division test. Raises TestInconclusive if the test cannot decide."""
    if strategy == "norm-form":
        return _norm_form(alg)
    if strategy == "residue-nonsquare":
        if q is None:
            raise ValueError("residue test needs a prime q")
        return _residue(alg, q)
    raise ValueError(f"unknown strategy {strategy!r}")
