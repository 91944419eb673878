"""Exact arithmetic in K[sqrt(r_1), ..., sqrt(r_t)] for a number field K.

Weight-matrix entries of the codes live in rings of this shape: a base field K
adjoined with square roots of a few elements (sqrt a, sqrt(-m), balancing
scalars). An element is a sum over subsets of radicals, keyed by bitmask.
Radicands must be real at the primary embedding of K and multiplicatively
independent modulo squares, which `RadicalTower` checks at construction.
"""
from __future__ import annotations

import cmath
import itertools
import math
from fractions import Fraction

import numpy as np

from .numfield import Automorphism, FieldElement, NumberField, identity_aut


def sqrt_in_field(x: FieldElement, max_den: int = 10**6):
    """Return y with y*y == x exactly, or None.

    Candidates come from solving the Vandermonde system for every sign pattern of
    the embedded square roots; each candidate is verified in exact arithmetic.
    """
    K = x.field
    if x.is_zero():
        return K.zero
    n = K.degree
    roots = [cmath.sqrt(v) for v in x.embeddings()]
    V = np.array([[r ** j for j in range(n)] for r in K.embeddings])
    for signs in itertools.product((1, -1), repeat=n - 1):
        rhs = np.array([roots[0]] + [s * r for s, r in zip(signs, roots[1:])])
        try:
            sol = np.linalg.solve(V, rhs)
        except np.linalg.LinAlgError:
            return None
        if np.max(np.abs(sol.imag)) > 1e-6:
            continue
        y = K([Fraction(float(v)).limit_denominator(max_den) for v in sol.real])
        if y * y == x:
            return y
    return None


class RadicalTower:
    def __init__(self, base: NumberField, radicands, names=None, base_conj: Automorphism | None = None):
        self.base = base
        self.radicands = tuple(base(r) for r in radicands)
        self.names = tuple(names) if names else tuple(f"r{i}" for i in range(len(self.radicands)))
        if base_conj is None:
            if abs(base.embeddings[0].imag) > 1e-12:
                base_conj = None
            else:
                base_conj = identity_aut(base)
        self.base_conj = base_conj
        vals, neg = [], []
        for r in self.radicands:
            v = r.embed()
            if abs(v.imag) > 1e-9 * max(1.0, abs(v)) or v == 0:
                raise ValueError("radicands must be nonzero and real at the primary embedding")
            vals.append(math.sqrt(v.real) if v.real > 0 else 1j * math.sqrt(-v.real))
            neg.append(v.real < 0)
            if base_conj is not None and base_conj(r) != r:
                raise ValueError("radicand not fixed by complex conjugation")
        self.values = tuple(complex(v) for v in vals)
        self.negative = tuple(neg)
        self._neg_mask = sum(1 << i for i, b in enumerate(neg) if b)
        for mask in range(1, 1 << len(self.radicands)):
            prod = base.one
            for i in range(len(self.radicands)):
                if mask >> i & 1:
                    prod = prod * self.radicands[i]
            if sqrt_in_field(prod) is not None:
                raise ValueError(f"radicands not independent modulo squares (mask {mask})")

    @property
    def conj_supported(self) -> bool:
        return self.base_conj is not None

    def index(self, name: str) -> int:
        return self.names.index(name)

    def elem(self, x=0) -> "RElem":
        if isinstance(x, RElem):
            return x
        x = self.base(x)
        return RElem(self, {} if x.is_zero() else {0: x})

    def radical(self, name_or_idx, coeff=1) -> "RElem":
        i = name_or_idx if isinstance(name_or_idx, int) else self.index(name_or_idx)
        c = self.base(coeff)
        return RElem(self, {} if c.is_zero() else {1 << i: c})

    def mask_value(self, mask: int) -> complex:
        v = 1 + 0j
        for i, r in enumerate(self.values):
            if mask >> i & 1:
                v *= r
        return v

    def to_config(self) -> dict:
        return {"base": self.base.to_config(), "names": list(self.names),
                "radicands": [[str(c) for c in r.coeffs] for r in self.radicands],
                "base_conj": None if self.base_conj is None else [str(c) for c in self.base_conj.generator_image.coeffs]}

    @classmethod
    def from_config(cls, cfg: dict) -> "RadicalTower":
        base = NumberField.from_config(cfg["base"])
        rads = [base([Fraction(c) for c in r]) for r in cfg["radicands"]]
        bc = cfg.get("base_conj")
        conj = None if bc is None else Automorphism(base, [Fraction(c) for c in bc], "conj")
        return cls(base, rads, cfg["names"], conj)


class RElem:
    __slots__ = ("tower", "terms")

    def __init__(self, tower: RadicalTower, terms: dict):
        self.tower = tower
        self.terms = terms

    def _wrap(self, other):
        if isinstance(other, RElem):
            return other
        return self.tower.elem(other)

    def __add__(self, other):
        o = self._wrap(other)
        t = dict(self.terms)
        for m, c in o.terms.items():
            v = t.get(m)
            v = c if v is None else v + c
            if v.is_zero():
                t.pop(m, None)
            else:
                t[m] = v
        return RElem(self.tower, t)

    __radd__ = __add__

    def __neg__(self):
        return RElem(self.tower, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._wrap(other)
        rad = self.tower.radicands
        t = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                c = c1 * c2
                common = m1 & m2
                i = 0
                while common:
                    if common & 1:
                        c = c * rad[i]
                    common >>= 1
                    i += 1
                m = m1 ^ m2
                v = t.get(m)
                t[m] = c if v is None else v + c
        return RElem(self.tower, {m: c for m, c in t.items() if not c.is_zero()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        o = self._wrap(other)
        return (self - o).is_zero()

    def __hash__(self):
        return hash(tuple(sorted((m, c.coeffs) for m, c in self.terms.items())))

    def __repr__(self):
        parts = []
        for m, c in sorted(self.terms.items()):
            rad = "*".join(f"sqrt({self.tower.names[i]})" for i in range(len(self.tower.names)) if m >> i & 1)
            parts.append(f"{[str(x) for x in c.coeffs]}" + (f"*{rad}" if rad else ""))
        return " + ".join(parts) or "0"

    def value(self) -> complex:
        return sum((c.embed() * self.tower.mask_value(m) for m, c in self.terms.items()), 0j)

    def flip(self, name_or_idx) -> "RElem":
        """sqrt(r_i) -> -sqrt(r_i)."""
        i = name_or_idx if isinstance(name_or_idx, int) else self.tower.index(name_or_idx)
        return RElem(self.tower, {m: (-c if m >> i & 1 else c) for m, c in self.terms.items()})

    def map_coeffs(self, phi: Automorphism) -> "RElem":
        """Apply a base automorphism to the coefficients, leaving radicals fixed."""
        return RElem(self.tower, {m: phi(c) for m, c in self.terms.items()})

    def conj(self) -> "RElem":
        bc = self.tower.base_conj
        if bc is None:
            raise ValueError("complex conjugation is not available for this tower")
        nm = self.tower._neg_mask
        out = {}
        for m, c in self.terms.items():
            c2 = bc(c)
            out[m] = -c2 if bin(m & nm).count("1") % 2 else c2
        return RElem(self.tower, out)

    def to_config(self):
        return [[m, [str(x) for x in c.coeffs]] for m, c in sorted(self.terms.items())]

    @classmethod
    def from_config(cls, tower: RadicalTower, data):
        return RElem(tower, {int(m): tower.base([Fraction(x) for x in cs]) for m, cs in data})


# exact matrices are lists of rows of RElem

def mat_zeros(tower, rows, cols):
    return [[tower.elem(0) for _ in range(cols)] for _ in range(rows)]


def mat_map(X, fn):
    return [[fn(e) for e in row] for row in X]


def mat_scale(X, s):
    return [[e * s for e in row] for row in X]


def mat_block(blocks):
    """Assemble a block matrix from a 2-D list of exact matrices."""
    out = []
    for brow in blocks:
        for r in range(len(brow[0])):
            row = []
            for B in brow:
                row.extend(B[r])
            out.append(row)
    return out


def mat_blockdiag(mats, tower):
    n = sum(len(m) for m in mats)
    out = mat_zeros(tower, n, n)
    o = 0
    for M in mats:
        for i, row in enumerate(M):
            for j, e in enumerate(row):
                out[o + i][o + j] = e
        o += len(M)
    return out


def mat_numeric(X) -> np.ndarray:
    return np.array([[e.value() for e in row] for row in X], dtype=complex)


def mat_is_zero(X) -> bool:
    return all(e.is_zero() for row in X for e in row)
