"""Monte Carlo simulation over the half-duplex NAF relay channel and the MIMO MAC."""
from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag, cholesky, solve_triangular
from scipy.optimize import brentq
from scipy.stats import binomtest

from .decode import DecodeProblem, grouped_decode, ml_exhaustive, sphere_decode
from .errors import Infeasible, ShapeMismatch, TooLarge
from .radicals import mat_zeros
from .stcode import ExactWeights, STCode, naf_frame_split, normalize_energy


def cgauss(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


@dataclass(frozen=True)
class RelayScenario:
    N: int
    n_s: int = 1
    n_r: int = 1
    n_d: int = 2
    rho: float = 1.0
    pi: tuple = (1.0, 1.0, 1.0)
    snr_db: tuple = (0, 5, 10, 15, 20)
    calibrate: bool = True

    def __post_init__(self):
        if self.n_r > self.n_s:
            raise ValueError("relays may not have more antennas than the source")
        if len(self.pi) != 3 or min(self.pi) < 0:
            raise ValueError("pi must be three nonnegative reals")


@dataclass(frozen=True)
class MacScenario:
    K: int
    n_s: int = 2
    n_d: int = 4
    m: int = 2
    snr_db: tuple = (0, 5, 10, 15, 20)


@dataclass
class ChannelRealization:
    F: np.ndarray
    H: list
    G: list


def draw_channel(scn: RelayScenario, rng) -> ChannelRealization:
    F = cgauss(rng, (scn.n_d, scn.n_s))
    H = [cgauss(rng, (scn.n_r, scn.n_s)) for _ in range(scn.N)]
    G = [cgauss(rng, (scn.n_d, scn.n_r)) for _ in range(scn.N)]
    return ChannelRealization(F, H, G)


def relay_gain(pi1: float, rho: float, snr: float, n_s: int) -> float:
    """Scalar amplification keeping the relay's average transmit power at one per antenna."""
    return (pi1 * rho * snr * n_s + 1.0) ** -0.5


def partition_energies(code: STCode, n_s: int, alphabet=(-1, 1)) -> tuple:
    """Average energy per entry in the first and second transmission partitions."""
    es = float(np.mean(np.asarray(alphabet, float) ** 2))
    W = code.weights
    b = 2 * n_s
    N = code.n // b
    e1 = e2 = 0.0
    for i in range(N):
        blk = W[:, i * b:(i + 1) * b, i * b:(i + 1) * b]
        e1 += es * np.sum(np.abs(blk[:, :n_s]) ** 2)
        e2 += es * np.sum(np.abs(blk[:, n_s:]) ** 2)
    cells = N * n_s * b
    return e1 / cells, e2 / cells


def power_split(scn: RelayScenario, snr_db: float, energies=(1.0, 1.0)) -> tuple:
    """Scale pi so that the average received signal power per antenna equals SNR."""
    snr = 10 ** (snr_db / 10)
    p1, p2, p3 = scn.pi
    e1, e2 = energies
    if not scn.calibrate:
        return tuple(scn.pi)

    def received(kappa):
        b2 = relay_gain(kappa * p1, scn.rho, snr, scn.n_s) ** 2
        first = kappa * p1 * snr * scn.n_s * e1
        second = (kappa * p2 * snr * scn.n_s * e2
                  + kappa * p3 * snr * b2 * scn.n_r * kappa * p1 * scn.rho * snr * scn.n_s * e1)
        return 0.5 * (first + second) - snr

    kappa = brentq(received, 1e-12, 1e6, xtol=1e-15, rtol=1e-13)
    return (kappa * p1, kappa * p2, kappa * p3)


def _noise(scn: RelayScenario, rng) -> list:
    T = 2 * scn.n_s
    out = []
    for _ in range(scn.N):
        out.append((cgauss(rng, (scn.n_d, T)), cgauss(rng, (scn.n_d, T)), cgauss(rng, (scn.n_r, T))))
    return out


def naf_transmit(scn: RelayScenario, frames: list, chan: ChannelRealization, snr_db: float,
                 noise_seed, pi=None, noiseless: bool = False) -> list:
    """Per-frame receptions (Y1, Y2) following the two-partition NAF model."""
    if len(frames) != scn.N:
        raise ShapeMismatch(f"expected {scn.N} frames, got {len(frames)}")
    snr = 10 ** (snr_db / 10)
    p1, p2, p3 = pi if pi is not None else power_split(scn, snr_db)
    b = relay_gain(p1, scn.rho, snr, scn.n_s)
    rng = noise_seed if isinstance(noise_seed, np.random.Generator) else np.random.default_rng(noise_seed)
    noise = _noise(scn, rng)
    out = []
    for i, C in enumerate(frames):
        if C.shape != (scn.n_s, 4 * scn.n_s):
            raise ShapeMismatch(f"frame {i} has shape {C.shape}")
        X1, X2 = C[:, :2 * scn.n_s], C[:, 2 * scn.n_s:]
        V1, V2, W = noise[i]
        if noiseless:
            V1, V2, W = 0 * V1, 0 * V2, 0 * W
        relay_in = math.sqrt(p1 * scn.rho * snr) * chan.H[i] @ X1 + W
        Y1 = math.sqrt(p1 * snr) * chan.F @ X1 + V1
        Y2 = math.sqrt(p2 * snr) * chan.F @ X2 + V2 + math.sqrt(p3 * snr) * chan.G[i] @ (b * relay_in)
        out.append((Y1, Y2))
    return out


@dataclass
class EquivalentChannel:
    blocks: list          # per-frame 2n_d x 2n_s matrices
    covariances: list     # per-frame noise covariance (per column)
    whiteners: list       # inverse Cholesky factors

    def virtual(self) -> np.ndarray:
        """Whitened block-diagonal channel acting on the block-diagonal codeword."""
        return block_diag(*[Wh @ Hb for Wh, Hb in zip(self.whiteners, self.blocks)])

    def whiten(self, receptions: list) -> np.ndarray:
        return block_diag(*[Wh @ np.vstack([Y1, Y2]) for Wh, (Y1, Y2) in zip(self.whiteners, receptions)])


def equivalent_channel(scn: RelayScenario, chan: ChannelRealization, snr_db: float, pi=None) -> EquivalentChannel:
    snr = 10 ** (snr_db / 10)
    p1, p2, p3 = pi if pi is not None else power_split(scn, snr_db)
    b = relay_gain(p1, scn.rho, snr, scn.n_s)
    c = math.sqrt(p3 * snr) * b
    blocks, covs, whit = [], [], []
    Z = np.zeros((scn.n_d, scn.n_s))
    for i in range(scn.N):
        top = np.hstack([math.sqrt(p1 * snr) * chan.F, Z])
        bottom = np.hstack([c * math.sqrt(p1 * scn.rho * snr) * chan.G[i] @ chan.H[i],
                            math.sqrt(p2 * snr) * chan.F])
        blocks.append(np.vstack([top, bottom]))
        C = np.eye(2 * scn.n_d, dtype=complex)
        C[scn.n_d:, scn.n_d:] += c * c * chan.G[i] @ chan.G[i].conj().T
        covs.append(C)
        L = cholesky(C, lower=True)
        whit.append(solve_triangular(L, np.eye(2 * scn.n_d), lower=True))
    return EquivalentChannel(blocks, covs, whit)


# ---------------------------------------------------------------------------
# multiple access

def mac_assemble(scn: MacScenario, user_codes: list) -> STCode:
    """Zero-pad each user's weights into its row block of the stacked codeword."""
    if len(user_codes) != scn.K:
        raise ShapeMismatch(f"expected {scn.K} user codes")
    n, T = user_codes[0].n, user_codes[0].T
    if any(c.n != n or c.T != T for c in user_codes):
        raise ShapeMismatch("user codes differ in shape")
    if n != scn.n_s:
        raise ShapeMismatch("user code rows must match n_s")
    weights = []
    for u, c in enumerate(user_codes):
        for B in c.weights:
            P = np.zeros((scn.K * n, T), dtype=complex)
            P[u * n:(u + 1) * n] = B
            weights.append(P)
    exact = None
    if all(c.exact is not None for c in user_codes):
        tower = user_codes[0].exact.tower
        if all(c.exact.tower is tower for c in user_codes):
            mats = []
            for u, c in enumerate(user_codes):
                for M in c.exact.mats:
                    P = mat_zeros(tower, scn.K * n, T)
                    for r, row in enumerate(M):
                        P[u * n + r] = list(row)
                    mats.append(P)
            exact = ExactWeights(tower, mats)
    prov = {"construction": "mac", "users": scn.K, "m": scn.m, "n_s": n,
            "user_ranks": [c.k for c in user_codes]}
    return STCode(np.array(weights), provenance=prov, exact=exact)


def mac_channel(scn: MacScenario, rng) -> np.ndarray:
    return cgauss(rng, (scn.n_d, scn.K * scn.n_s))


# ---------------------------------------------------------------------------
# block error rate

@dataclass
class BlerRow:
    snr_db: float
    bler: float
    ci_lo: float
    ci_hi: float
    trials: int
    avg_decode_nodes: float
    errors: int = 0
    bound_ok: bool = True

    def csv(self) -> str:
        return (f"{self.snr_db:g},{self.bler:.6g},{self.ci_lo:.6g},{self.ci_hi:.6g},"
                f"{self.trials},{self.avg_decode_nodes:.6g}")


CSV_HEADER = "snr_db,bler,ci_lo,ci_hi,trials,avg_decode_nodes"


def to_csv(rows: list) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in rows:
        buf.write(r.csv() + "\n")
    return buf.getvalue()


def wilson(errors: int, trials: int) -> tuple:
    ci = binomtest(errors, trials).proportion_ci(0.95, method="wilson")
    return float(ci.low), float(ci.high)


def _decode(decoder, prob, partition):
    if decoder == "ml":
        return ml_exhaustive(prob)
    if decoder == "sphere":
        return sphere_decode(prob)
    if decoder == "grouped":
        return grouped_decode(prob, partition)
    raise ValueError(f"unknown decoder {decoder!r}")


def _trial(code, scn, decoder, partition, S, snr_db, pi, rng):
    k = code.k
    s = np.asarray(S, float)[rng.integers(0, len(S), k)]
    X = code.codeword(s)
    if isinstance(scn, RelayScenario):
        chan = draw_channel(scn, rng)
        frames = naf_frame_split(X, scn.n_s, scn.N)
        rx = naf_transmit(scn, frames, chan, snr_db, rng, pi=pi)
        eq = equivalent_channel(scn, chan, snr_db, pi=pi)
        prob = DecodeProblem(eq.whiten(rx), eq.virtual(), code, S)
    else:
        snr = 10 ** (snr_db / 10)
        H = mac_channel(scn, rng) * math.sqrt(snr / (scn.K * scn.n_s))
        Y = H @ X + cgauss(rng, (scn.n_d, code.T))
        prob = DecodeProblem(Y, H, code, S)
    res = _decode(decoder, prob, partition)
    err = not np.array_equal(res.s, s)
    return err, res.nodes, res.leaves


def _run_chunk(args):
    code, scn, decoder, partition, S, snr_db, pi, seed, si, lo, hi, bound = args
    errs = nodes = 0
    ok = True
    for t in range(lo, hi):
        rng = np.random.default_rng([seed, si, t])
        e, n, leaves = _trial(code, scn, decoder, partition, S, snr_db, pi, rng)
        errs += e
        nodes += n
        if bound is not None and leaves > bound:
            ok = False
    return errs, nodes, ok


def run_bler(code: STCode, scenario, decoder: str = "sphere", snr_grid=None, trials: int = 1000,
             seed: int = 0, alphabet=(-1, 1), threads: int = 1, partition=None,
             normalize: bool = True) -> list:
    """Block error rate per SNR with Wilson 95% intervals.

    Each trial draws its own generator from (seed, SNR index, trial index), so
    results do not depend on how trials are spread over worker processes.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    S = tuple(sorted(int(v) for v in alphabet))
    if decoder == "ml" and len(S) ** code.k > 2 ** 22:
        raise Infeasible(f"exhaustive decoding of |S|^{code.k} exceeds the budget")
    bound = None
    if decoder == "grouped":
        if partition is None:
            from .fdan import analyze
            partition = analyze(code).partition
        q = len(S)
        bound = q ** len(partition.separator) * sum(q ** len(g) for g in partition.groups)
        if bound > 2 ** 26:
            raise Infeasible("grouped decoding exceeds the budget at this alphabet")
    if normalize:
        code = normalize_energy(code, S)
    snr_grid = list(snr_grid if snr_grid is not None else scenario.snr_db)
    energies = None
    if isinstance(scenario, RelayScenario):
        energies = partition_energies(code, scenario.n_s, S)
    rows = []
    pool = ProcessPoolExecutor(threads) if threads > 1 else None
    try:
        for si, snr_db in enumerate(snr_grid):
            pi = power_split(scenario, snr_db, energies) if energies else None
            nchunks = max(1, threads * 4) if pool else 1
            edges = np.linspace(0, trials, nchunks + 1).astype(int)
            jobs = [(code, scenario, decoder, partition, S, snr_db, pi, seed, si, int(a), int(b), bound)
                    for a, b in zip(edges[:-1], edges[1:]) if b > a]
            results = list(pool.map(_run_chunk, jobs)) if pool else [_run_chunk(j) for j in jobs]
            errs = sum(r[0] for r in results)
            nodes = sum(r[1] for r in results)
            lo, hi = wilson(errs, trials)
            rows.append(BlerRow(float(snr_db), errs / trials, lo, hi, trials, nodes / trials, errs,
                                all(r[2] for r in results)))
    finally:
        if pool:
            pool.shutdown()
    return rows


def snr_at_bler(rows: list, target: float) -> float:
    """Log-linear interpolation of the SNR where the curve crosses `target`."""
    for a, b in zip(rows[:-1], rows[1:]):
        if a.bler >= target >= b.bler and a.bler > 0:
            if b.bler == 0:
                return b.snr_db
            la, lb, lt = math.log(a.bler), math.log(b.bler), math.log(target)
            if la == lb:
                return a.snr_db
            return a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db)
    return math.nan
