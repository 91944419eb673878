"""Linear space-time codes: weight matrices, the iterated and relay maps, and
the two relay constructions (single-antenna and two-antenna nodes)."""
from __future__ import annotations

import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .cda import AlgebraSpec, DivisionCertificate, certify_division
from .errors import (AutomorphismOrderMismatch, DivisionNotCertified, HypothesisViolated,
                     ShapeMismatch, TestInconclusive, TooLarge)
from .numfield import (RATIONALS, Automorphism, FieldElement, NumberField, cyclotomic,
                       cyclotomic_real, is_square_residue, mult_order, residue_field)
from .radicals import (RadicalTower, RElem, mat_block, mat_blockdiag, mat_map, mat_numeric,
                       mat_scale, mat_zeros, sqrt_in_field)

MATERIALIZE_CAP = 2 ** 20


@dataclass
class ExactWeights:
    tower: RadicalTower
    mats: list  # list of exact matrices (rows of RElem)


@dataclass
class STCode:
    weights: np.ndarray                  # (k, n, T) complex
    rate: Fraction = None
    provenance: dict = field(default_factory=dict)
    exact: ExactWeights | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex)
        if w.ndim != 3:
            raise ShapeMismatch("weights must have shape (k, n, T)")
        self.weights = w
        if self.rate is None:
            self.rate = Fraction(self.k, self.T)
        if Fraction(self.rate) != Fraction(self.k, self.T):
            raise ValueError("rate must equal k/T")
        self.rate = Fraction(self.rate)
        if self.k > 2 * self.n * self.T or (self.k and smallest_singular_value(w) <= 1e-9):
            raise ValueError("weight matrices are not linearly independent over the reals")

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    @property
    def n(self) -> int:
        return self.weights.shape[1]

    @property
    def T(self) -> int:
        return self.weights.shape[2]

    def codeword(self, s) -> np.ndarray:
        return np.tensordot(np.asarray(s, dtype=float), self.weights, axes=1)

    def codewords(self, S: np.ndarray) -> np.ndarray:
        """Batch of codewords for coefficient rows S (m, k)."""
        return np.tensordot(np.asarray(S, dtype=float), self.weights, axes=1)

    def scaled(self, c: float) -> "STCode":
        prov = dict(self.provenance)
        prov["scale"] = prov.get("scale", 1.0) * c
        return STCode(self.weights * c, self.rate, prov, None)

    def real_generator(self) -> np.ndarray:
        return real_vectorize(self.weights)


def real_vectorize(weights: np.ndarray) -> np.ndarray:
    """Columns vec(B_i) with real parts stacked over imaginary parts (column-major vec)."""
    k = weights.shape[0]
    v = np.transpose(weights, (0, 2, 1)).reshape(k, -1)
    return np.concatenate([v.real, v.imag], axis=1).T


def smallest_singular_value(weights: np.ndarray) -> float:
    G = real_vectorize(weights)
    norms = np.linalg.norm(G, axis=0)
    if np.any(norms == 0):
        return 0.0
    return float(np.linalg.svd(G / norms, compute_uv=False)[-1])


# ---------------------------------------------------------------------------
# maps on exact matrices

def _is_exact(X):
    return isinstance(X, list)


def alpha_iter(X, Y, tau: Callable, theta=None, balanced: bool = False, zeta: int = 1,
               sqrt_theta_prime=None):
    """Iterated map on a pair of n x n matrices.

    Unbalanced: [[X, theta tau(Y)], [Y, tau(X)]].
    Balanced:   [[X, zeta r tau(Y)], [r Y, tau(X)]] with r = sqrt(theta').
    `tau` acts on a single entry for exact matrices and on the whole array otherwise.
    """
    exact = _is_exact(X)
    nX = (len(X), len(X[0])) if exact else np.shape(X)
    nY = (len(Y), len(Y[0])) if exact else np.shape(Y)
    if nX != nY or nX[0] != nX[1]:
        raise ShapeMismatch(f"{nX} vs {nY}")
    if balanced:
        if zeta not in (1, -1) or sqrt_theta_prime is None:
            raise ValueError("balanced map needs zeta in {1,-1} and sqrt(theta')")
        up, low = sqrt_theta_prime * zeta, sqrt_theta_prime
    else:
        if theta is None:
            raise ValueError("unbalanced map needs theta")
        up, low = theta, 1
    if exact:
        tX, tY = mat_map(X, tau), mat_map(Y, tau)
        return mat_block([[X, mat_scale(tY, up)], [mat_scale(Y, low), tX]])
    return np.block([[X, up * tau(Y)], [low * np.asarray(Y), tau(X)]])


def psi(X, eta: Automorphism, N: int):
    """diag(X, eta(X), ..., eta^(N-1)(X)) with eta applied to the coefficients of the entries."""
    if N < 1:
        raise ValueError("N must be positive")
    if eta.power(N).generator_image != eta.field.gen:
        raise AutomorphismOrderMismatch(f"eta^{N} is not the identity")
    blocks = [X]
    for _ in range(N - 1):
        blocks.append(mat_map(blocks[-1], lambda e: e.map_coeffs(eta)))
    tower = X[0][0].tower
    return mat_blockdiag(blocks, tower)


def code_from_exact(tower: RadicalTower, mats: list, provenance: dict) -> STCode:
    w = np.array([mat_numeric(M) for M in mats])
    return STCode(w, provenance=provenance, exact=ExactWeights(tower, mats))


# ---------------------------------------------------------------------------
# constructions

def _radical_or_scalar(x: FieldElement, name: str, rads: list, names: list):
    """Register sqrt(x) as a radical unless it is rational; returns a callable building it."""
    r = sqrt_in_field(x)
    if r is not None and r.is_rational():
        return lambda T, r=r: T.elem(r)
    rads.append(x)
    names.append(name)
    return lambda T, name=name: T.radical(name)


def _certify(alg: AlgebraSpec, q, allow_unverified: bool, override_reason: str):
    tried = []
    try:
        return certify_division(alg, "norm-form"), tried
    except TestInconclusive as exc:
        tried.append(f"norm-form: {exc}")
    for qq in ([q] if q else []):
        try:
            return certify_division(alg, "residue-nonsquare", qq), tried
        except TestInconclusive as exc:
            tried.append(f"residue-nonsquare q={qq}: {exc}")
    if not allow_unverified:
        raise DivisionNotCertified("; ".join(tried))
    return None, tried + [f"override: {override_reason or 'user flag'}"]


def _cert_dict(cert: DivisionCertificate | None):
    if cert is None:
        return None
    d = dict(cert.__dict__)
    d["red_poly"] = list(d["red_poly"])
    d["summary"] = cert.summary()
    return d


@dataclass
class SimoTower:
    """Base field K0 = Q(xi) (totally real) with generator eta of order N, F = Q(sqrt(-m))."""
    K0: NumberField
    eta: Automorphism
    m: int
    a: int
    gamma: FieldElement
    certify_q: int | None = None
    allow_unverified: bool = False
    override_reason: str = ""
    label: str = ""


def build_simo_code(N: int, tower: SimoTower) -> STCode:
    K0, a, m = tower.K0, int(tower.a), int(tower.m)
    gamma = K0(tower.gamma)
    checks = []
    if a >= 0:
        raise HypothesisViolated("a < 0", f"a = {a}")
    g0 = gamma.embed()
    if abs(g0.imag) > 1e-12 or g0.real >= 0:
        raise HypothesisViolated("gamma < 0", f"gamma embeds to {g0}")
    if not K0.is_totally_real():
        raise HypothesisViolated("xi totally real")
    if tower.eta.order() != N or N != K0.degree:
        raise HypothesisViolated("eta generates Gal(K/F)", f"order {tower.eta.order()}, N = {N}")
    checks.append(f"a = {a} < 0; gamma = {g0.real:.6g} < 0; eta has order {N}")
    alg = AlgebraSpec(K0, a, gamma, center_radicand=-m, label=tower.label)
    cert, tried = _certify(alg, tower.certify_q, tower.allow_unverified, tower.override_reason)
    checks += tried
    if cert is not None:
        checks.append(cert.summary())
    alg.division_certificate = cert

    rads, names = [K0(a), K0(-m)], ["a", "m"]
    s_of = _radical_or_scalar(-gamma, "s", rads, names)
    try:
        T = RadicalTower(K0, rads, names)
    except ValueError as exc:
        raise HypothesisViolated("independent radicals", str(exc)) from exc
    sa, s, sm = T.radical("a"), s_of(T), T.radical("m")
    one, zero = T.elem(1), T.elem(0)
    gam1 = [
        [[one, zero], [zero, one]],
        [[sa, zero], [zero, -sa]],
        [[zero, s * sa], [s * sa, zero]],
        [[zero, -s], [s, zero]],
    ]
    xi = K0.gen
    betas = [xi ** j for j in range(N)]
    mats = []
    for extra in (one, sm):
        for G in gam1:
            for b in betas:
                mats.append(psi(mat_scale(G, extra * T.elem(b)), tower.eta, N))
    prov = {
        "construction": "simo", "label": tower.label, "N": N, "m": m, "a": a,
        "gamma": [str(c) for c in gamma.coeffs], "field": K0.label,
        "basis": "power basis of xi over F",
        "block_size": 2, "n_s": 1,
        "predicted": {"groups": [list(range(i * N, (i + 1) * N)) for i in range(4)],
                      "separator": list(range(4 * N, 8 * N)), "exponent": 5 * N},
        "checks": checks, "certificate": _cert_dict(cert),
    }
    return code_from_exact(T, mats, prov)


def _anisotropy_witness(t: FieldElement, a: int):
    """Show that t and t/a are nonsquares in K, so t is not a square in K(sqrt a)."""
    out = []
    for name, x in (("theta/gamma", t), ("theta/(a gamma)", t / a)):
        if any(v.real < 0 and abs(v.imag) < 1e-12 for v in x.embeddings()):
            out.append(f"{name} negative at a real embedding")
            continue
        nrm = x.norm()
        if nrm < 0 or not (_is_rational_square(nrm)):
            out.append(f"{name} has norm {nrm}, not a rational square")
            continue
        if sqrt_in_field(x) is None:
            out.append(f"{name}: exhaustive root search found no square root")
            continue
        return None, f"{name} is a square in K"
    return out, ""


def _is_rational_square(r: Fraction) -> bool:
    r = Fraction(r)
    if r < 0:
        return False
    n, d = r.numerator, r.denominator
    return math.isqrt(n) ** 2 == n and math.isqrt(d) ** 2 == d


def build_mimo_code(p: int, a: int, gamma, theta, label: str = "",
                    allow_unverified: bool = False, override_reason: str = "") -> STCode:
    """Two-antenna relay code: Psi of the balanced iterated map over the grouped basis."""
    K = cyclotomic_real(p)
    N = (p - 1) // 2
    xi = K.gen
    eta = Automorphism(K, xi * xi - 2, "eta")
    gamma, theta = K(gamma), K(theta)
    checks = []
    if a >= 0:
        raise HypothesisViolated("a < 0", f"a = {a}")
    q = abs(a)
    try:
        rfs = residue_field(K, q)
    except ValueError as exc:
        raise HypothesisViolated("(a)O_K prime", str(exc)) from exc
    if len(rfs) != 1 or rfs[0].f != N:
        raise HypothesisViolated("(a)O_K prime", f"{q} is not inert in K")
    rf = rfs[0]
    checks.append(f"(a) = ({a}) is prime in O_K, residue field F_{q}^{N}")
    g0 = gamma.embed()
    if g0.real >= 0:
        raise HypothesisViolated("gamma < 0", f"gamma embeds to {g0.real}")
    for name, x in (("gamma", gamma), ("theta", theta)):
        try:
            xr = rf.reduce(x)
        except ValueError as exc:
            raise HypothesisViolated(f"{name} integral at (a)", str(exc)) from exc
        if xr.is_zero() or is_square_residue(xr):
            raise HypothesisViolated(f"{name} nonsquare mod (a)")
        checks.append(f"{name} nonsquare mod (a): order {mult_order(xr)} in group of order {rf.group_order}")
    alg = AlgebraSpec(K, a, gamma, label=label)
    cert, tried = _certify(alg, q, allow_unverified, override_reason)
    checks += tried
    if cert is not None:
        checks.append(cert.summary())
    wit, why = _anisotropy_witness(theta / gamma, a)
    if wit is None:
        raise HypothesisViolated("<gamma,-theta> anisotropic over L", why)
    checks += [f"anisotropy: {w}" for w in wit]
    th0 = theta.embed().real
    zeta = 1 if th0 > 0 else -1
    theta_p = theta * zeta

    rads, names = [K(a)], ["a"]
    s_of = _radical_or_scalar(-gamma, "s", rads, names)
    t_of = _radical_or_scalar(theta_p, "t", rads, names)
    try:
        T = RadicalTower(K, rads, names)
    except ValueError as exc:
        raise HypothesisViolated("independent radicals", str(exc)) from exc
    sa, s, t = T.radical("a"), s_of(T), t_of(T)
    half = Fraction(1, 2)
    omega = (T.elem(half) + sa * half) if a % 4 == 1 else sa
    tau = lambda e: e.flip("a")
    zero = T.elem(0)

    def X(pos, b):
        x = [zero] * 4
        x[pos] = T.elem(b)
        c, cs = x[0] + x[1] * omega, x[0] + x[1] * tau(omega)
        d, ds = x[2] + x[3] * omega, x[2] + x[3] * tau(omega)
        return [[c, -(s * ds)], [s * d, cs]]

    base = [X(pos, xi ** j) for pos in range(4) for j in range(N)]
    Z = mat_zeros(T, 2, 2)
    mats = []
    for B in base:
        mats.append(psi(alpha_iter(B, Z, tau, balanced=True, zeta=zeta, sqrt_theta_prime=t), eta, N))
    for B in base:
        mats.append(psi(alpha_iter(Z, B, tau, balanced=True, zeta=zeta, sqrt_theta_prime=t), eta, N))
    exponent = 4 * N if a % 4 == 1 else 2 * N
    prov = {
        "construction": "mimo", "label": label, "p": p, "N": N, "a": a,
        "gamma": [str(c) for c in gamma.coeffs], "theta": [str(c) for c in theta.coeffs],
        "zeta": zeta, "field": K.label, "block_size": 4, "n_s": 2,
        "predicted": {"exponent": exponent, "groups": 2 if a % 4 == 1 else 4},
        "checks": checks, "certificate": _cert_dict(cert),
    }
    return code_from_exact(T, mats, prov)


def build_counterexample_code() -> STCode:
    """Four-relay code over Q(zeta5) with unbalanced maps; not fast-decodable."""
    K = cyclotomic(5)
    z = K.gen
    conj = Automorphism(K, z ** 4, "conj")
    eta = Automorphism(K, z ** 2, "eta")
    N = 4
    gamma = 1 - z
    theta = (z + 1) / (z - 1)
    T = RadicalTower(K, [K(-3)], ["a"], base_conj=conj)
    sa = T.radical("a")
    omega = T.elem(Fraction(1, 2)) + sa * Fraction(1, 2)
    tau = lambda e: e.flip("a")
    zero = T.elem(0)
    g, th = T.elem(gamma), T.elem(theta)

    def lam(pos, b):
        x = [zero] * 4
        x[pos] = T.elem(b)
        c = x[0] + x[1] * omega
        d = x[2] + x[3] * omega
        return [[c, g * tau(d)], [d, tau(c)]]

    base = [lam(pos, z ** j) for pos in range(4) for j in range(N)]
    Z = mat_zeros(T, 2, 2)
    mats = [psi(alpha_iter(B, Z, tau, theta=th), eta, N) for B in base]
    mats += [psi(alpha_iter(Z, B, tau, theta=th), eta, N) for B in base]
    checks = ["hypotheses of Theorem 2 not met: K = Q(zeta5) is not a maximal real subfield, "
              "gamma is not real, unbalanced representation"]
    alg = AlgebraSpec(K, -3, gamma)
    try:
        cert = certify_division(alg, "residue-nonsquare", 3)
        checks.append(cert.summary())
    except TestInconclusive as exc:
        cert = None
        checks.append(f"residue-nonsquare q=3: {exc}")
    rf = residue_field(K, 3)[0]
    for name, x in (("gamma", gamma), ("theta", theta)):
        r = rf.reduce(x)
        checks.append(f"{name}: order {mult_order(r)} in F_3^4, square={is_square_residue(r)}")
    prov = {"construction": "counterexample", "label": "example5", "N": N, "field": K.label,
            "block_size": 4, "n_s": 2, "warning": "hypotheses of Theorem 2 not met",
            "predicted": {"exponent": 30}, "checks": checks, "certificate": _cert_dict(cert)}
    return code_from_exact(T, mats, prov)


def alamouti() -> STCode:
    T = RadicalTower(RATIONALS, [-1], ["i"])
    i, one, zero = T.radical("i"), T.elem(1), T.elem(0)
    mats = [
        [[one, zero], [zero, one]],
        [[i, zero], [zero, -i]],
        [[zero, -one], [one, zero]],
        [[zero, i], [i, zero]],
    ]
    return code_from_exact(T, mats, {"construction": "alamouti", "label": "alamouti",
                                     "predicted": {"exponent": 1}})


def mac_user_weights(T: RadicalTower, X_list, tau, m: int = 2):
    """[X, tau(X), ..., tau^(m-1)(X)] for each exact user weight."""
    out = []
    for X in X_list:
        parts = [X]
        for _ in range(m - 1):
            parts.append(mat_map(parts[-1], tau))
        out.append(mat_block([parts]))
    return out


def random_block_code(block_size: int, blocks: int, seed: int = 0, kind: str = "gaussian") -> STCode:
    """Block-diagonal code whose real generator is random.

    kind="gaussian" draws iid Gaussian coordinates (no shaping at all);
    kind="rotation" draws a Haar orthogonal matrix (perfect cubic shaping).
    """
    dim = 2 * block_size * block_size * blocks
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((dim, dim))
    if kind == "rotation":
        Q, R = np.linalg.qr(A)
        A = Q * np.sign(np.diag(R))
    elif kind != "gaussian":
        raise ValueError(f"unknown kind {kind!r}")
    n = block_size * blocks
    canon = []
    for b in range(blocks):
        for part in (1, 1j):
            for r in range(block_size):
                for c in range(block_size):
                    E = np.zeros((n, n), complex)
                    E[b * block_size + r, b * block_size + c] = part
                    canon.append(E)
    w = np.tensordot(A.T, np.array(canon), axes=1)
    return STCode(w, provenance={"construction": f"random-{kind}", "seed": seed,
                                 "block_size": block_size, "n_s": block_size // 2})


def random_rotation_code(block_size: int, blocks: int, seed: int = 0) -> STCode:
    return random_block_code(block_size, blocks, seed, "rotation")


# ---------------------------------------------------------------------------

def normalize_energy(code: STCode, alphabet: Sequence[int]) -> STCode:
    """Scale to unit average energy per nonzero entry position for iid uniform symbols."""
    S = np.asarray(alphabet, dtype=float)
    es = float(np.mean(S ** 2))
    support = np.any(np.abs(code.weights) > 1e-12, axis=0)
    total = es * float(np.sum(np.abs(code.weights) ** 2))
    c = math.sqrt(support.sum() / total)
    return code.scaled(c)


@dataclass
class Codebook:
    code: STCode
    alphabet: tuple
    codewords: np.ndarray | None = None

    @property
    def size(self) -> int:
        return len(self.alphabet) ** self.code.k

    def coefficient_chunks(self, chunk: int = 1 << 14) -> Iterator[np.ndarray]:
        yield from coefficient_chunks(self.alphabet, self.code.k, chunk)


def coefficient_chunks(alphabet, k: int, chunk: int = 1 << 14) -> Iterator[np.ndarray]:
    """All of S^k in lexicographic order, in blocks of rows."""
    S = np.asarray(alphabet, dtype=float)
    q = len(S)
    total = q ** k
    powers = q ** np.arange(k - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % q
        yield S[digits]


def enumerate_codebook(code: STCode, S, materialize: bool = True) -> Codebook:
    S = tuple(sorted(int(x) for x in S))
    if any(x != -y for x, y in zip(S, reversed(S))):
        raise ValueError("alphabet must be symmetric")
    cb = Codebook(code, S)
    if materialize:
        if cb.size > MATERIALIZE_CAP:
            raise TooLarge(f"{cb.size} codewords exceed the cap {MATERIALIZE_CAP}")
        coeffs = np.concatenate(list(cb.coefficient_chunks()))
        cb.codewords = code.codewords(coeffs)
    return cb


def naf_frame_split(X: np.ndarray, n_s: int, N: int) -> list:
    X = np.asarray(X)
    b = 2 * n_s
    if X.shape != (b * N, b * N):
        raise ShapeMismatch(f"expected {(b * N, b * N)}, got {X.shape}")
    mask = np.kron(np.eye(N), np.ones((b, b))) == 0
    scale = max(np.max(np.abs(X)), 1.0)
    if np.any(np.abs(X[mask]) > 1e-12 * scale):
        raise ShapeMismatch("matrix is not block diagonal")
    frames = []
    for i in range(N):
        Xi = X[i * b:(i + 1) * b, i * b:(i + 1) * b]
        frames.append(np.hstack([Xi[:n_s, :], Xi[n_s:, :]]))
    return frames


def naf_frame_merge(frames: list, n_s: int) -> np.ndarray:
    b = 2 * n_s
    N = len(frames)
    X = np.zeros((b * N, b * N), dtype=complex)
    for i, C in enumerate(frames):
        if C.shape != (n_s, 2 * b):
            raise ShapeMismatch(f"frame {i} has shape {C.shape}")
        X[i * b:i * b + n_s, i * b:(i + 1) * b] = C[:, :b]
        X[i * b + n_s:(i + 1) * b, i * b:(i + 1) * b] = C[:, b:]
    return X


# ---------------------------------------------------------------------------
# text serialization

def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def dumps_code(code: STCode) -> str:
    out = io.StringIO()
    out.write("fdstc-code 1\n")
    out.write(f"k {code.k}\nn {code.n}\nT {code.T}\nrate {code.rate}\n")
    out.write("provenance " + json.dumps(_jsonable(code.provenance), sort_keys=True) + "\n")
    for i, B in enumerate(code.weights):
        out.write(f"weight {i}\n")
        for row in B:
            out.write(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row) + "\n")
    if code.exact is not None:
        out.write("exact-tower " + json.dumps(code.exact.tower.to_config(), sort_keys=True) + "\n")
        for i, M in enumerate(code.exact.mats):
            out.write(f"exact-weight {i} " + json.dumps([[e.to_config() for e in row] for row in M]) + "\n")
    return out.getvalue()


def loads_code(text: str) -> STCode:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "fdstc-code 1":
        raise ValueError("not a code file")
    hdr = {}
    pos = 1
    while pos < len(lines) and not lines[pos].startswith("weight "):
        key, _, val = lines[pos].partition(" ")
        hdr[key] = val
        pos += 1
    k, n, T = int(hdr["k"]), int(hdr["n"]), int(hdr["T"])
    prov = json.loads(hdr.get("provenance", "{}"))
    w = np.zeros((k, n, T), dtype=complex)
    for i in range(k):
        if lines[pos].strip() != f"weight {i}":
            raise ValueError(f"expected weight {i}")
        pos += 1
        for r in range(n):
            parts = lines[pos].split()
            pos += 1
            for c, pr in enumerate(parts):
                re, im = pr.split(",")
                w[i, r, c] = complex(float(re), float(im))
    exact = None
    if pos < len(lines) and lines[pos].startswith("exact-tower "):
        tower = RadicalTower.from_config(json.loads(lines[pos][len("exact-tower "):]))
        pos += 1
        mats = []
        for i in range(k):
            head = f"exact-weight {i} "
            if not lines[pos].startswith(head):
                raise ValueError(f"expected exact weight {i}")
            data = json.loads(lines[pos][len(head):])
            mats.append([[RElem.from_config(tower, e) for e in row] for row in data])
            pos += 1
        exact = ExactWeights(tower, mats)
    return STCode(w, Fraction(hdr["rate"]), prov, exact)


def save_code(code: STCode, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_code(code))


def load_code(path) -> STCode:
    with open(path, encoding="utf-8") as fh:
        return loads_code(fh.read())
