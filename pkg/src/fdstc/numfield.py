"""Exact arithmetic in small number fields and their residue fields.

A field is Q(xi) given by the integer minimal polynomial of xi. Elements are
rational coordinate vectors in the power basis 1, xi, ..., xi^(n-1). Quadratic
extensions K(sqrt a) are kept as explicit pairs (c, d) over K.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import reduce as _fold
from typing import Iterable, Sequence

import numpy as np
import sympy

from .errors import DivisionByZero, FieldMismatch, RamifiedOrNonMonogenic, ZeroElement


# ---------------------------------------------------------------------------
# dense polynomial helpers, coefficient lists low -> high

def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _pmul(p, q):
    if not p or not q:
        return []
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _pdivmod(p, q):
    p, q = _trim(p), _trim(q)
    if not q:
        raise DivisionByZero("polynomial division by zero")
    quo = [Fraction(0)] * max(len(p) - len(q) + 1, 0)
    rem = [Fraction(c) for c in p]
    lead = Fraction(q[-1])
    while len(rem) >= len(q) and rem:
        shift = len(rem) - len(q)
        c = rem[-1] / lead
        quo[shift] = c
        for i, b in enumerate(q):
            rem[shift + i] -= c * b
        rem = _trim(rem)
    return quo, rem


def _psub(p, q):
    n = max(len(p), len(q))
    return _trim([(p[i] if i < len(p) else 0) - (q[i] if i < len(q) else 0) for i in range(n)])


def _inverse_mod(p, m):
    """Inverse of p modulo m over Q via the extended Euclidean algorithm."""
    r0, r1 = _trim(m), _trim(p)
    s0, s1 = [], [Fraction(1)]
    while r1:
        quo, rem = _pdivmod(r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, _psub(s0, _pmul(quo, s1))
    if len(r0) != 1:
        raise DivisionByZero("element is not invertible")
    c = Fraction(r0[0])
    return [x / c for x in s0]


def _det(rows):
    """Determinant of a square matrix of Fractions by Gaussian elimination."""
    a = [list(map(Fraction, r)) for r in rows]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f:
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
    return det


def _polish_root(coeffs_high, r, steps=4):
    dp = np.polyder(coeffs_high)
    for _ in range(steps):
        d = np.polyval(dp, r)
        if d == 0:
            break
        r = r - np.polyval(coeffs_high, r) / d
    return complex(r)


# ---------------------------------------------------------------------------

class NumberField:
    """Q(xi) with xi a root of an integer monic irreducible polynomial.

    `embedding` is an approximate value of xi used to choose the primary complex
    embedding; numerical images of elements are taken there unless asked otherwise.
    """

    def __init__(self, min_poly: Sequence[int], label: str = "", embedding: complex | None = None):
        mp = tuple(int(c) for c in min_poly)
        if len(mp) < 2 or mp[-1] != 1:
            raise ValueError("minimal polynomial must be monic of degree >= 1")
        x = sympy.Symbol("x")
        if len(mp) > 2 and not sympy.Poly(list(reversed(mp)), x).is_irreducible:
            raise ValueError(f"{mp} is reducible over Q")
        self.min_poly = mp
        self.degree = len(mp) - 1
        self.label = label or f"Q[x]/({self._poly_str()})"
        high = np.array(list(reversed(mp)), dtype=float)
        roots = [_polish_root(high, r) for r in np.roots(high)] if self.degree > 1 else [complex(-mp[0])]
        roots = [complex(r.real, 0.0) if abs(r.imag) < 1e-12 else r for r in roots]
        roots.sort(key=lambda r: (round(r.real, 12), round(r.imag, 12)))
        if embedding is not None:
            i = int(np.argmin([abs(r - embedding) for r in roots]))
            roots.insert(0, roots.pop(i))
        self.embeddings = tuple(roots)
        for r in self.embeddings:
            if abs(np.polyval(high, r)) > 1e-10 * max(1.0, abs(r)) ** self.degree:
                raise ValueError("root accuracy check failed")

    def _poly_str(self):
        terms = []
        for i, c in reversed(list(enumerate(self.min_poly))):
            if c:
                terms.append(f"{c}*x^{i}")
        return " + ".join(terms)

    def __repr__(self):
        return f"NumberField({self.label})"

    def __eq__(self, other):
        return (isinstance(other, NumberField) and self.min_poly == other.min_poly
                and abs(self.embeddings[0] - other.embeddings[0]) < 1e-9)

    def __hash__(self):
        return hash(self.min_poly)

    def __call__(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.field != self:
                raise FieldMismatch("element belongs to another field")
            return value
        if isinstance(value, (int, Fraction)):
            return FieldElement(self, [value])
        return FieldElement(self, list(value))

    @property
    def gen(self) -> "FieldElement":
        if self.degree == 1:
            return FieldElement(self, [-self.min_poly[0]])
        return FieldElement(self, [0, 1])

    @property
    def one(self):
        return FieldElement(self, [1])

    @property
    def zero(self):
        return FieldElement(self, [])

    def is_totally_real(self) -> bool:
        return all(abs(r.imag) < 1e-9 for r in self.embeddings)

    def to_config(self) -> dict:
        return {"min_poly": list(self.min_poly), "label": self.label,
                "embedding": [self.embeddings[0].real, self.embeddings[0].imag]}

    @classmethod
    def from_config(cls, cfg: dict) -> "NumberField":
        if "cyclotomic_real" in cfg:
            return cyclotomic_real(int(cfg["cyclotomic_real"]))
        if "cyclotomic" in cfg:
            return cyclotomic(int(cfg["cyclotomic"]))
        if "quadratic" in cfg:
            return quadratic(int(cfg["quadratic"]))
        emb = cfg.get("embedding")
        if emb is not None and not isinstance(emb, (int, float, complex)):
            emb = complex(emb[0], emb[1])
        return cls(cfg["min_poly"], cfg.get("label", ""), emb)


RATIONALS = NumberField([0, 1], "Q")


def cyclotomic_real(p: int) -> NumberField:
    """Q(zeta_p + zeta_p^-1); the minimal polynomial comes from a rounded root product."""
    if p < 3 or not sympy.isprime(p):
        raise ValueError("p must be an odd prime")
    roots = [2 * np.cos(2 * np.pi * k / p) for k in range(1, (p - 1) // 2 + 1)]
    high = np.poly(roots)
    ints = [int(round(c)) for c in high]
    if max(abs(c - i) for c, i in zip(high, ints)) > 1e-6:
        raise ArithmeticError("rounding of root product is not reliable")
    xi = 2 * np.cos(2 * np.pi / p)
    if abs(np.polyval(ints, xi)) > 1e-12 * max(abs(c) for c in ints):
        raise ArithmeticError("rounded polynomial does not vanish at 2cos(2pi/p)")
    return NumberField(list(reversed(ints)), f"Q(zeta{p}+zeta{p}^-1)", xi)


def cyclotomic(p: int) -> NumberField:
    if not sympy.isprime(p):
        raise ValueError("p must be prime")
    return NumberField([1] * p, f"Q(zeta{p})", cmath.exp(2j * cmath.pi / p))


def quadratic(d: int) -> NumberField:
    """Q(sqrt d) with the principal square root as primary embedding."""
    if d == 0 or d == 1 or not sympy.ntheory.factor_.core(abs(d)) == abs(d):
        raise ValueError("d must be square-free and different from 0, 1")
    return NumberField([-d, 0, 1], f"Q(sqrt({d}))", cmath.sqrt(d))


# ---------------------------------------------------------------------------

def _reduce_int(p: list, mp: tuple, n: int) -> list:
    """Reduce an integer coefficient list modulo the monic polynomial mp of degree n."""
    p = list(p)
    for top in range(len(p) - 1, n - 1, -1):
        c = p[top]
        if c:
            shift = top - n
            for i in range(n):
                if mp[i]:
                    p[shift + i] -= c * mp[i]
    del p[n:]
    return p + [0] * (n - len(p))


class FieldElement:
    """Element of a number field, stored as integer numerators over a common denominator."""
    __slots__ = ("field", "num", "den")

    def __init__(self, field: NumberField, coeffs: Iterable):
        c = [Fraction(v) for v in coeffs]
        n = field.degree
        if len(c) > n:
            _, c = _pdivmod(c, field.min_poly)
        den = 1
        for v in c:
            den = den * v.denominator // math.gcd(den, v.denominator)
        num = [int(v * den) for v in c] + [0] * (n - len(c))
        self.field = field
        self._set(num, den)

    def _set(self, num, den):
        g = den
        for v in num:
            if v:
                g = math.gcd(g, v)
                if g == 1:
                    break
        if g != 1:
            num = [v // g for v in num]
            den //= g
        self.num = tuple(num)
        self.den = den

    @classmethod
    def _raw(cls, field, num, den):
        obj = cls.__new__(cls)
        obj.field = field
        obj._set(num, den)
        return obj

    @property
    def coeffs(self) -> tuple:
        return tuple(Fraction(v, self.den) for v in self.num)

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field is not self.field and other.field != self.field:
                raise FieldMismatch(f"{self.field.label} vs {other.field.label}")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, [other])
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.den == o.den:
            return FieldElement._raw(self.field, [a + b for a, b in zip(self.num, o.num)], self.den)
        return FieldElement._raw(self.field, [a * o.den + b * self.den for a, b in zip(self.num, o.num)],
                                 self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement._raw(self.field, [-a for a in self.num], self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return FieldElement._raw(self.field, [a * other for a in self.num], self.den)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        f = self.field
        prod = _reduce_int(_pmul(self.num, o.num), f.min_poly, f.degree)
        return FieldElement._raw(f, prod, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise DivisionByZero("inverse of zero")
        return FieldElement(self.field, _inverse_mod(self.coeffs, self.field.min_poly))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        base = self if e >= 0 else self.inverse()
        e = abs(e)
        out = self.field.one
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = FieldElement(self.field, [other])
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.num == other.num and self.den == other.den and self.field == other.field

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"FieldElement({[str(c) for c in self.coeffs]}, {self.field.label})"

    def is_zero(self) -> bool:
        return not any(self.num)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is not rational")
        return self.coeffs[0]

    def embed(self, i: int = 0) -> complex:
        r = self.field.embeddings[i]
        acc = 0j
        for c in reversed(self.num):
            acc = acc * r + c
        return acc / self.den

    def embeddings(self) -> list[complex]:
        return [self.embed(i) for i in range(self.field.degree)]

    def mult_matrix(self):
        """Matrix of multiplication by self in the power basis (columns = images)."""
        xi = self.field.gen
        cols, b = [], self.field.one
        for _ in range(self.field.degree):
            cols.append((self * b).coeffs)
            b = b * xi
        return [[cols[j][i] for j in range(len(cols))] for i in range(len(cols))]

    def norm(self) -> Fraction:
        return _det(self.mult_matrix())

    def trace(self) -> Fraction:
        m = self.mult_matrix()
        return sum(m[i][i] for i in range(len(m)))


class Automorphism:
    """Field automorphism determined by the image of the generator."""

    def __init__(self, field: NumberField, generator_image, name: str = ""):
        img = field(generator_image)
        acc = field.zero
        for c in reversed(field.min_poly):
            acc = acc * img + c
        if not acc.is_zero():
            raise ValueError("image is not a root of the minimal polynomial")
        self.field = field
        self.generator_image = img
        self.name = name or "phi"

    def __call__(self, x: FieldElement) -> FieldElement:
        return apply_aut(self, x)

    def __repr__(self):
        return f"Automorphism({self.name}: xi -> {self.generator_image.coeffs})"

    def power(self, k: int) -> "Automorphism":
        img = self.field.gen
        for _ in range(k):
            img = self(img)
        return Automorphism(self.field, img, f"{self.name}^{k}")

    def order(self) -> int:
        x = self.field.gen
        for k in range(1, self.field.degree + 1):
            x = self(x)
            if x == self.field.gen:
                return k
        raise ArithmeticError("automorphism order exceeds field degree")

    def orbit(self, x: FieldElement) -> list[FieldElement]:
        out = [x]
        for _ in range(self.order() - 1):
            out.append(self(out[-1]))
        return out


def apply_aut(phi: Automorphism, x: FieldElement) -> FieldElement:
    if x.field != phi.field:
        raise FieldMismatch("automorphism applied outside its field")
    acc = phi.field.zero
    for c in reversed(x.coeffs):
        acc = acc * phi.generator_image + c
    return acc


def identity_aut(field: NumberField) -> Automorphism:
    return Automorphism(field, field.gen, "id")


class QuadraticExtElement:
    """c + sqrt(a) d over K, with a a square-free integer."""
    __slots__ = ("c", "d", "a")

    def __init__(self, c: FieldElement, d: FieldElement, a: int):
        if c.field != d.field:
            raise FieldMismatch("c and d live in different fields")
        self.c, self.d, self.a = c, d, int(a)

    @classmethod
    def lift(cls, x: FieldElement, a: int):
        return cls(x, x.field.zero, a)

    def _coerce(self, other):
        if isinstance(other, QuadraticExtElement):
            if other.a != self.a:
                raise FieldMismatch("different quadratic extensions")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticExtElement(self.c.field(other), self.c.field.zero, self.a)
        if isinstance(other, FieldElement):
            return QuadraticExtElement(other, other.field.zero, self.a)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return QuadraticExtElement(self.c + o.c, self.d + o.d, self.a)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticExtElement(-self.c, -self.d, self.a)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        return QuadraticExtElement(self.c * o.c + self.d * o.d * self.a,
                                   self.c * o.d + self.d * o.c, self.a)

    __rmul__ = __mul__

    def conj(self) -> "QuadraticExtElement":
        return QuadraticExtElement(self.c, -self.d, self.a)

    sigma = conj

    def norm(self) -> FieldElement:
        return self.c * self.c - self.d * self.d * self.a

    def inverse(self):
        n = self.norm()
        if n.is_zero():
            raise DivisionByZero("inverse of zero")
        ninv = n.inverse()
        return QuadraticExtElement(self.c * ninv, -self.d * ninv, self.a)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def map(self, phi: Automorphism) -> "QuadraticExtElement":
        return QuadraticExtElement(phi(self.c), phi(self.d), self.a)

    def is_zero(self):
        return self.c.is_zero() and self.d.is_zero()

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.a == o.a and self.c == o.c and self.d == o.d

    def __hash__(self):
        return hash((self.c, self.d, self.a))

    def __repr__(self):
        return f"({self.c.coeffs} + sqrt({self.a})*{self.d.coeffs})"

    def embed(self, i: int = 0) -> complex:
        return self.c.embed(i) + cmath.sqrt(self.a) * self.d.embed(i)


def field_norm(x, over=None):
    """Norm of x down one or more tower levels.

    FieldElement: over=None gives the rational norm; over=Automorphism gives the
    product of the orbit (norm to the fixed field). QuadraticExtElement: over=None
    gives c^2 - a d^2 in K; over="Q" continues to Q; over=Automorphism multiplies
    the coefficientwise orbit.
    """
    if isinstance(x, FieldElement):
        if over is None or over == "Q":
            return x.norm()
        return _fold(lambda u, v: u * v, over.orbit(x))
    if isinstance(x, QuadraticExtElement):
        if over is None or over == "K":
            return x.norm()
        if over == "Q":
            return x.norm().norm()
        orb = [x]
        for _ in range(over.order() - 1):
            orb.append(orb[-1].map(over))
        return _fold(lambda u, v: u * v, orb)
    raise TypeError("unsupported element type")


# ---------------------------------------------------------------------------
# residue fields

def _to_int_mod(c: Fraction, q: int) -> int:
    if c.denominator % q == 0:
        raise ValueError(f"denominator divisible by {q}")
    return c.numerator * pow(c.denominator, -1, q) % q


class ResidueField:
    """F_q[x]/(g) for an irreducible factor g of the minimal polynomial mod q."""

    def __init__(self, field: NumberField, q: int, red_poly: Sequence[int]):
        self.field = field
        self.char = q
        self.red_poly = tuple(int(c) % q for c in red_poly)
        self.f = len(self.red_poly) - 1
        self.size = q ** self.f
        self._group_factors = None

    def __repr__(self):
        return f"ResidueField(F_{self.char}^{self.f}, {self.red_poly})"

    @property
    def group_order(self) -> int:
        return self.size - 1

    def group_prime_factors(self) -> list[int]:
        if self._group_factors is None:
            self._group_factors = sorted(sympy.factorint(self.group_order))
        return self._group_factors

    def _reduce_poly(self, p):
        q, g = self.char, self.red_poly
        p = [c % q for c in p]
        while len(p) > self.f:
            lead = p.pop()
            if lead:
                shift = len(p) - self.f
                for i in range(self.f):
                    p[shift + i] = (p[shift + i] - lead * g[i]) % q
        return tuple(p + [0] * (self.f - len(p)))

    def element(self, coeffs) -> "ResidueElement":
        return ResidueElement(self, self._reduce_poly(list(coeffs)))

    def reduce(self, x) -> "ResidueElement":
        if isinstance(x, (int, Fraction)):
            x = self.field(x)
        if x.field != self.field:
            raise FieldMismatch("element from another field")
        return self.element([_to_int_mod(c, self.char) for c in x.coeffs])

    @property
    def one(self):
        return self.element([1])


class ResidueElement:
    __slots__ = ("rf", "v")

    def __init__(self, rf: ResidueField, v):
        self.rf, self.v = rf, tuple(v)

    def __mul__(self, other):
        if isinstance(other, int):
            other = self.rf.element([other])
        return ResidueElement(self.rf, self.rf._reduce_poly(_pmul(self.v, other.v)))

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, int):
            other = self.rf.element([other])
        return self.rf.element([a + b for a, b in zip(self.v, other.v)])

    __radd__ = __add__

    def __neg__(self):
        return self.rf.element([-a for a in self.v])

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.rf.element([other])
        return isinstance(other, ResidueElement) and self.v == other.v and self.rf.red_poly == other.rf.red_poly

    def __hash__(self):
        return hash(self.v)

    def __repr__(self):
        return f"ResidueElement({self.v} mod {self.rf.char})"

    def is_zero(self):
        return not any(self.v)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out, base = self.rf.one, self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def inverse(self):
        if self.is_zero():
            raise ZeroElement("zero has no inverse")
        return self ** (self.rf.group_order - 1)

    def mult_order(self) -> int:
        return mult_order(self)

    def is_square(self) -> bool:
        return is_square_residue(self)


def residue_field(field: NumberField, q: int) -> list[ResidueField]:
    """One residue field per irreducible factor of the minimal polynomial mod q."""
    if not sympy.isprime(q):
        raise ValueError(f"{q} is not prime")
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(field.min_poly)), x, modulus=q)
    _, factors = poly.factor_list()
    out = []
    for g, mult in factors:
        if mult > 1:
            raise RamifiedOrNonMonogenic(f"minimal polynomial has a repeated factor mod {q}")
        coeffs = [int(c) % q for c in reversed(g.all_coeffs())]
        out.append(ResidueField(field, q, coeffs))
    out.sort(key=lambda r: (r.f, r.red_poly))
    return out


def mult_order(x: ResidueElement) -> int:
    """Multiplicative order, descending from |F^x| through its prime factors."""
    if x.is_zero():
        raise ZeroElement("order of zero")
    e = x.rf.group_order
    for p in x.rf.group_prime_factors():
        while e % p == 0 and (x ** (e // p)) == 1:
            e //= p
    return e


def is_square_residue(x: ResidueElement) -> bool:
    if x.is_zero():
        raise ZeroElement("zero is excluded")
    if x.rf.char == 2:
        return True
    return (x ** (x.rf.group_order // 2)) == 1
