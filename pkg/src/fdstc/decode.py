"""Decoders for linear space-time codes and lattice figures of merit.

Everything works on the real model y = B s + noise, where column i of B is the
real vectorization of H B_i.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, InvalidPartition, NotFound, RankDeficient, TooLarge
from .fdan import Partition, predicted_zero_mask
from .stcode import Codebook, STCode, coefficient_chunks, real_vectorize

ML_CAP = 2 ** 22


@dataclass
class DecodeProblem:
    Y: np.ndarray
    H: np.ndarray
    code: STCode
    S: tuple

    def __post_init__(self):
        self.Y = np.atleast_2d(np.asarray(self.Y, dtype=complex))
        self.H = np.atleast_2d(np.asarray(self.H, dtype=complex))
        self.S = tuple(sorted(int(v) for v in self.S))
        if self.H.shape[1] != self.code.n or self.Y.shape != (self.H.shape[0], self.code.T):
            raise ValueError(f"inconsistent shapes Y{self.Y.shape} H{self.H.shape} "
                             f"code {self.code.n}x{self.code.T}")

    def lattice(self):
        HB = np.einsum("ab,kbc->kac", self.H, self.code.weights)
        B = real_vectorize(HB)
        y = real_vectorize(self.Y[None])[:, 0]
        return B, y

    @classmethod
    def from_lattice(cls, B, y, S):
        """Wrap a real model directly (used by the channel simulator after whitening)."""
        obj = cls.__new__(cls)
        obj.S = tuple(sorted(int(v) for v in S))
        obj._B, obj._y = np.asarray(B, float), np.asarray(y, float)
        obj.lattice = lambda: (obj._B, obj._y)
        return obj


@dataclass
class DecodeResult:
    s: np.ndarray
    metric: float
    nodes: int
    leaves: int
    critical_leaves: int = 0
    fallback: bool = False


def _metric(B, y, s):
    r = y - B @ s
    return float(r @ r)


def _ml(B, y, S, k):
    total = len(S) ** k
    if total > ML_CAP:
        raise TooLarge(f"|S|^k = {total} exceeds {ML_CAP}")
    best, best_s = math.inf, None
    for chunk in coefficient_chunks(S, k, 1 << 15):
        r = y[None, :] - chunk @ B.T
        d = np.einsum("ij,ij->i", r, r)
        i = int(np.argmin(d))
        if d[i] < best:
            best, best_s = float(d[i]), chunk[i].copy()
    return best_s, best, total


def ml_exhaustive(p: DecodeProblem) -> DecodeResult:
    B, y = p.lattice()
    s, m, total = _ml(B, y, p.S, B.shape[1])
    return DecodeResult(s, m, total, total, total)


def _qr(B, y):
    Q, R = np.linalg.qr(B)
    z = Q.T @ y
    const = float(y @ y - z @ z)
    return R, z, max(const, 0.0)


def _full_rank(R) -> bool:
    d = np.abs(np.diag(R))
    return R.shape[0] >= R.shape[1] and d.min() > 1e-10 * max(d.max(), 1e-300)


def _se_search(R, z, S, r2):
    """Schnorr-Euchner depth-first search for min ||z - R s||^2 over S^k within r2."""
    k = R.shape[1]
    Sv = np.asarray(S, dtype=float)
    diag = np.diag(R).copy()
    s = np.zeros(k)
    best_s, best = None, r2
    nodes = leaves = 0
    # per-level candidate order and partial distances
    order = [None] * k
    ptr = [0] * k
    dist = np.zeros(k + 1)
    i = k - 1

    def enter(i):
        c = (z[i] - R[i, i + 1:] @ s[i + 1:]) / diag[i]
        off = np.abs(Sv - c)
        order[i] = sorted(range(len(Sv)), key=lambda t: (off[t], Sv[t]))
        ptr[i] = 0
        return c

    enter(i)
    while True:
        if ptr[i] >= len(Sv):
            i += 1
            if i >= k:
                break
            continue
        t = order[i][ptr[i]]
        ptr[i] += 1
        v = Sv[t]
        e = z[i] - R[i, i:] @ np.concatenate(([v], s[i + 1:]))
        d = dist[i + 1] + e * e
        nodes += 1
        if d > best:
            # candidates are sorted by distance, so the rest of this level is worse
            ptr[i] = len(Sv)
            continue
        s[i] = v
        if i == 0:
            leaves += 1
            if best_s is None or d < best or (d == best and tuple(s) < tuple(best_s)):
                best, best_s = d, s.copy()
            continue
        dist[i] = d
        i -= 1
        enter(i)
    return best_s, best, nodes, leaves


def sphere_decode(p: DecodeProblem, radius="auto", on_rank_deficient: str = "fallback") -> DecodeResult:
    B, y = p.lattice()
    k = B.shape[1]
    R, z, const = _qr(B, y)
    if not _full_rank(R):
        if on_rank_deficient == "raise":
            raise RankDeficient("lattice generator is not of full column rank")
        warnings.warn("rank-deficient generator, falling back to exhaustive search", RuntimeWarning)
        s, m, total = _ml(B, y, p.S, k)
        return DecodeResult(s, m, total, total, total, fallback=True)
    Sv = np.asarray(p.S, dtype=float)
    if radius == "auto":
        zf = np.linalg.solve(R[:k, :k], z[:k])
        s0 = Sv[np.argmin(np.abs(zf[:, None] - Sv[None, :]), axis=1)]
        e = z - R @ s0
        r2 = float(e @ e) * (1 + 1e-9) + 1e-12
    else:
        r2 = float(radius) ** 2 - const
        if r2 < 0:
            raise NotFound("radius below the distance to the lattice span")
    s, d, nodes, leaves = _se_search(R, z, p.S, r2)
    if s is None:
        raise NotFound(f"no lattice point within radius {radius}")
    return DecodeResult(s, _metric(B, y, s), nodes, leaves, leaves)


def sphere_decode_retry(p: DecodeProblem, radius: float) -> DecodeResult:
    """Double the radius until a point is found."""
    while True:
        try:
            return sphere_decode(p, radius)
        except NotFound:
            radius *= 2


def _group_min(D, T, cand, step=1 << 16):
    """For each row t of T return (min_c ||t - D c||^2, argmin) over candidate rows."""
    best = np.full(T.shape[0], np.inf)
    arg = np.zeros(T.shape[0], dtype=np.int64)
    for start in range(0, cand.shape[0], step):
        C = cand[start:start + step]
        P = C @ D.T                                   # (L, g)
        rows = max(1, (1 << 22) // max(P.shape[0], 1))
        for r0 in range(0, T.shape[0], rows):
            diff = T[r0:r0 + rows, None, :] - P[None, :, :]
            d = np.einsum("ijk,ijk->ij", diff, diff)
            j = np.argmin(d, axis=1)
            dj = d[np.arange(d.shape[0]), j]
            better = dj < best[r0:r0 + rows]
            best[r0:r0 + rows] = np.where(better, dj, best[r0:r0 + rows])
            arg[r0:r0 + rows] = np.where(better, j + start, arg[r0:r0 + rows])
    return best, arg


def grouped_decode(p: DecodeProblem, partition: Partition, tol: float = 1e-9) -> DecodeResult:
    """Condition on the separator symbols, then solve each group independently."""
    B, y = p.lattice()
    k = B.shape[1]
    order = partition.ordering
    if sorted(order) != list(range(k)):
        raise InvalidPartition("partition does not cover the code indices")
    Bo = B[:, order]
    if Bo.shape[0] < k:
        raise InvalidPartition("fewer real observations than symbols")
    R, z, const = _qr(Bo, y)
    mask = predicted_zero_mask(partition)
    if mask.any() and np.max(np.abs(R[mask])) > tol * np.linalg.norm(R):
        raise InvalidPartition("R factor does not have the predicted zero pattern for this channel")
    Sv = np.asarray(p.S, dtype=float)
    q = len(Sv)
    sizes = [len(g) for g in partition.groups]
    x = len(partition.separator)
    offs = np.cumsum([0] + sizes)
    sep = slice(offs[-1], k)
    sx_all = np.concatenate(list(coefficient_chunks(p.S, x))) if x else np.zeros((1, 0))
    e = z[sep][None, :] - sx_all @ R[sep, sep].T
    total = np.einsum("ij,ij->i", e, e)
    choice = []
    for g, (a, b) in enumerate(zip(offs[:-1], offs[1:])):
        cand = np.concatenate(list(coefficient_chunks(p.S, b - a)))
        T = z[a:b][None, :] - sx_all @ R[a:b, sep].T
        dmin, arg = _group_min(R[a:b, a:b], T, cand)
        total = total + dmin
        choice.append((cand, arg))
    j = int(np.argmin(total))
    s_ord = np.concatenate([cand[arg[j]] for cand, arg in choice] + [sx_all[j]])
    s = np.empty(k)
    s[order] = s_ord
    outer = q ** x
    leaves = outer * sum(q ** n for n in sizes)
    critical = outer * max((q ** n for n in sizes), default=1)
    return DecodeResult(s, _metric(B, y, s), outer + leaves, leaves, critical)


# ---------------------------------------------------------------------------
# figures of merit

@dataclass
class MinDetResult:
    value: float
    evaluated: int
    total: int
    exhaustive: bool
    argmin: np.ndarray | None

    @property
    def coverage(self) -> float:
        return self.evaluated / self.total if self.total else 1.0


def _dets(D: np.ndarray) -> np.ndarray:
    if D.shape[1] == D.shape[2]:
        return np.abs(np.linalg.det(D)) ** 2
    G = D @ np.conj(np.transpose(D, (0, 2, 1)))
    return np.abs(np.linalg.det(G))


def _ranks(D: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    sv = np.linalg.svd(D, compute_uv=False)
    return np.sum(sv > tol * np.maximum(sv[:, :1], 1e-300), axis=1)


def _difference_vectors(alphabet, k, mode, budget, seed, max_total=None):
    """Yield batches of nonzero coefficient differences.

    Exhaustive when the count fits the budget; otherwise a fixed set of
    single-coordinate differences plus seeded random differences.
    """
    S = np.asarray(sorted(alphabet), dtype=float)
    q = len(S)
    if mode == "pairwise":
        total = q ** k * (q ** k - 1) // 2
    else:
        Dset = np.unique(np.subtract.outer(S, S))
        total = (len(Dset) ** k - 1) // 2
    if total <= budget:
        if mode == "pairwise":
            words = np.concatenate(list(coefficient_chunks(S, k)))
            for i in range(len(words) - 1):
                yield words[i + 1:] - words[i]
        else:
            Dset = np.unique(np.subtract.outer(S, S))
            for chunk in coefficient_chunks(Dset, k):
                nz = chunk[np.any(chunk != 0, axis=1)]
                first = nz[np.arange(len(nz)), np.argmax(nz != 0, axis=1)]
                yield nz[first > 0]
        return total, True
    step = float(np.min(np.diff(S)))
    fixed = np.eye(k) * step
    yield fixed
    rng = np.random.default_rng(seed)
    left = budget - k
    # full-size draws truncated afterwards, so a larger budget samples a superset
    while left > 0:
        m = min(left, 1 << 14)
        if mode == "pairwise":
            a = S[rng.integers(0, q, (1 << 14, k))]
            b = S[rng.integers(0, q, (1 << 14, k))]
            d = (a - b)[:m]
        else:
            Dset = np.unique(np.subtract.outer(S, S))
            d = Dset[rng.integers(0, len(Dset), (1 << 14, k))][:m]
        d = d[np.any(d != 0, axis=1)]
        yield d
        left -= m
    return total, False


def _scan(cb: Codebook, mode, budget, seed, fn):
    code = cb.code
    gen = _difference_vectors(cb.alphabet, code.k, mode, budget, seed)
    evaluated = 0
    best, best_v = math.inf, None
    while True:
        try:
            batch = next(gen)
        except StopIteration as stop:
            total, exhaustive = stop.value
            break
        for start in range(0, len(batch), 4096):
            d = batch[start:start + 4096]
            vals = fn(code.codewords(d))
            i = int(np.argmin(vals))
            evaluated += len(d)
            if vals[i] < best:
                best, best_v = vals[i], d[i].copy()
    return best, best_v, evaluated, total, exhaustive


def min_det(cb: Codebook, mode: str = "linear", budget: int = 2 ** 22, seed: int = 0,
            strict: bool = False) -> MinDetResult:
    """min det[(X - X')(X - X')^H] over distinct codewords (or sampled evidence)."""
    best, v, ev, total, exh = _scan(cb, mode, budget, seed, _dets)
    if strict and not exh:
        raise BudgetExceeded(f"{total} differences exceed budget {budget}")
    return MinDetResult(float(best), ev, total, exh, v)


def min_rank(cb: Codebook, mode: str = "linear", budget: int = 2 ** 22, seed: int = 0,
             strict: bool = False) -> MinDetResult:
    best, v, ev, total, exh = _scan(cb, mode, budget, seed, lambda D: _ranks(D).astype(float))
    if strict and not exh:
        raise BudgetExceeded(f"{total} differences exceed budget {budget}")
    return MinDetResult(int(best), ev, total, exh, v)


@dataclass
class DetSpectrum:
    zero_count: int
    min_nonzero: float
    evaluated: int
    exhaustive: bool

    def gap_ok(self, floor: float = 1.0, tol: float = 1e-9) -> bool:
        """True when every nonzero |det| sits at or above `floor`."""
        return self.min_nonzero >= floor - tol


def det_spectrum(cb: Codebook, mode: str = "linear", budget: int = 2 ** 16, seed: int = 0,
                 zero_tol: float = 1e-9) -> DetSpectrum:
    """Split |det(X - X')| into (numerically) zero values and the smallest nonzero one."""
    code = cb.code
    gen = _difference_vectors(cb.alphabet, code.k, mode, budget, seed)
    zeros = evaluated = 0
    low = math.inf
    while True:
        try:
            batch = next(gen)
        except StopIteration as stop:
            _, exhaustive = stop.value
            break
        for start in range(0, len(batch), 4096):
            d = np.sqrt(_dets(code.codewords(batch[start:start + 4096])))
            z = d < zero_tol
            zeros += int(z.sum())
            if (~z).any():
                low = min(low, float(d[~z].min()))
            evaluated += len(d)
    return DetSpectrum(zeros, low, evaluated, exhaustive)
