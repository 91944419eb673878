"""Fast-decodability analysis.

The Hurwitz-Radon matrix M records which weight matrices fail to be mutually
orthogonal. The decoding-complexity exponent of a conditional group partition
is |separator| + largest group, so the best partition is a minimum-integrity
vertex separator of the non-orthogonality graph, found here by branch and bound
over twin classes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, InvalidPartition, StructureViolated
from .stcode import STCode, real_vectorize


@dataclass
class Partition:
    groups: list
    separator: list
    exponent: int
    exact: bool = True
    gram_schmidt: bool = False

    @property
    def ordering(self) -> list:
        return [i for g in self.groups for i in g] + list(self.separator)

    @property
    def max_group(self) -> int:
        return max((len(g) for g in self.groups), default=0)

    def describe(self, k: int) -> str:
        s = f"exponent {self.exponent} of {k}"
        if self.gram_schmidt:
            return s + " (Gram-Schmidt only)"
        s += f", {len(self.groups)} groups"
        if self.separator:
            s += f", separator {len(self.separator)}"
        return s


@dataclass
class HRQFReport:
    M: np.ndarray
    adjacency: np.ndarray
    exact: bool
    partition: Partition | None = None
    search_nodes: int = 0
    r_max_violation: float | None = None
    notes: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.M.shape[0]

    @property
    def exponent(self) -> int | None:
        return None if self.partition is None else self.partition.exponent

    @property
    def ordering(self) -> list | None:
        return None if self.partition is None else self.partition.ordering

    def to_text(self, include_matrix: bool = False) -> str:
        lines = [f"k {self.k}", f"exact_arithmetic {self.exact}",
                 f"edges {int(np.triu(self.adjacency, 1).sum())}"]
        if self.partition is not None:
            p = self.partition
            lines += [f"exponent {p.exponent}", f"search_exact {p.exact}",
                      f"gram_schmidt_floor {p.gram_schmidt}",
                      "groups " + "; ".join(" ".join(map(str, g)) for g in p.groups),
                      "separator " + " ".join(map(str, p.separator))]
        if self.r_max_violation is not None:
            lines.append(f"r_structure_max_violation {self.r_max_violation:.3e}")
        lines += [f"note {n}" for n in self.notes]
        if include_matrix:
            lines.append("M")
            lines += [" ".join(f"{v:.6g}" for v in row) for row in self.M]
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------

def _numeric_M(W: np.ndarray) -> np.ndarray:
    k = W.shape[0]
    P = np.einsum("iab,jcb->ijac", W, W.conj())       # B_i B_j^H
    S = P + np.conj(np.transpose(P, (0, 1, 3, 2)))     # + B_j B_i^H
    return np.sum(np.abs(S) ** 2, axis=(2, 3)).real.reshape(k, k)


def _sparse(M):
    return {(r, c): e for r, row in enumerate(M) for c, e in enumerate(row) if not e.is_zero()}


def _exact_zero_pattern(exact, candidates=None) -> np.ndarray:
    """zero[i, j] is True iff B_i B_j^H + B_j B_i^H vanishes exactly.

    Only pairs flagged in `candidates` are checked; the rest are reported nonzero.
    """
    mats = [_sparse(M) for M in exact.mats]
    conj = [{rc: e.conj() for rc, e in m.items()} for m in mats]
    bycol = []
    for m in conj:
        d = {}
        for (r, c), e in m.items():
            d.setdefault(c, []).append((r, e))
        bycol.append(d)
    k = len(mats)
    zero = np.zeros((k, k), dtype=bool)

    def product(i, j):
        # A = B_i B_j^H as a sparse dict
        A = {}
        for (r, l), e in mats[i].items():
            for c, f in bycol[j].get(l, ()):
                v = e * f
                key = (r, c)
                A[key] = A[key] + v if key in A else v
        return A

    for i in range(k):
        for j in range(i + 1, k):
            if candidates is not None and not candidates[i, j]:
                continue
            A = product(i, j)
            ok = True
            for (r, c), v in A.items():
                w = A.get((c, r))
                s = v + (w.conj() if w is not None else 0)
                if not s.is_zero():
                    ok = False
                    break
            zero[i, j] = zero[j, i] = ok
    return zero


def hrqf(code: STCode, tol: float = 1e-10, use_exact: bool = True) -> HRQFReport:
    W = code.weights
    M = _numeric_M(W)
    M = 0.5 * (M + M.T)
    scale = M.max() if M.size else 1.0
    notes = []
    exact = use_exact and code.exact is not None and code.exact.tower.conj_supported
    if exact:
        # entries far above rounding level are certainly nonzero; the rest are decided exactly
        near = M < 1e-6 * scale
        zero = _exact_zero_pattern(code.exact, near)
        np.fill_diagonal(zero, False)
        bad = ~zero & (M < 1e-13 * scale) & ~np.eye(len(M), dtype=bool)
        if bad.any():
            raise ArithmeticError("exact and numerical HRQF patterns disagree")
        M = np.where(zero, 0.0, M)
    else:
        zero = M <= tol * scale
        np.fill_diagonal(zero, False)
        M = np.where(zero, 0.0, M)
        notes.append(f"floating-point zero test at relative tolerance {tol:g}")
    adj = ~zero
    np.fill_diagonal(adj, False)
    return HRQFReport(M, adj, bool(exact), notes=notes)


# ---------------------------------------------------------------------------
# partition search

def _masks(adj: np.ndarray) -> list:
    k = adj.shape[0]
    return [sum(1 << j for j in range(k) if adj[i, j]) for i in range(k)]


def _components(nbr: list, alive: int) -> list:
    comps = []
    rest = alive
    while rest:
        low = rest & -rest
        comp = low
        frontier = low
        while frontier:
            v = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            new = nbr[v] & alive & ~comp
            comp |= new
            frontier |= new
        comps.append(comp)
        rest &= ~comp
    return comps


def _max_comp(nbr, alive) -> int:
    best = 0
    rest = alive
    while rest:
        low = rest & -rest
        comp = frontier = low
        while frontier:
            v = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            new = nbr[v] & alive & ~comp
            comp |= new
            frontier |= new
        best = max(best, bin(comp).count("1"))
        rest &= ~comp
    return best


def twin_classes(adj: np.ndarray) -> list:
    """Classes of vertices with equal closed or equal open neighbourhoods."""
    k = adj.shape[0]
    nbr = _masks(adj)
    closed = {}
    for v in range(k):
        closed.setdefault(nbr[v] | (1 << v), []).append(v)
    classes, singles = [], []
    for members in closed.values():
        (classes if len(members) > 1 else singles).append(members)
    opened = {}
    for (v,) in singles:
        opened.setdefault(nbr[v], []).append(v)
    classes += list(opened.values())
    return sorted(classes, key=lambda c: c[0])


def _bits(mask: int) -> list:
    out = []
    while mask:
        v = (mask & -mask).bit_length() - 1
        out.append(v)
        mask &= mask - 1
    return out


def _joint_search(nbr, classes, budget, best, best_W):
    nodes = 0
    exhausted = False

    def dfs(ci, kept, W):
        nonlocal best, best_W, nodes, exhausted
        nodes += 1
        if nodes > budget:
            exhausted = True
            return
        lb = len(W) + _max_comp(nbr, kept)
        if (lb, len(W)) > best[:2]:
            return
        if ci == len(classes):
            cand = (lb, len(W), tuple(sorted(W)))
            if cand < best:
                best, best_W = cand, list(W)
            return
        cls = classes[ci]
        for w in range(len(cls) + 1):
            add = 0
            for v in cls[w:]:
                add |= 1 << v
            dfs(ci + 1, kept | add, W + cls[:w])
            if exhausted:
                return

    dfs(0, 0, [])
    return best_W, best, nodes, exhausted


def _capped_cut(nbr, classes, t, budget):
    """Smallest W inside one component leaving no component larger than t."""
    best = None
    nodes = 0
    exhausted = False

    def dfs(ci, kept, W):
        nonlocal best, nodes, exhausted
        nodes += 1
        if nodes > budget:
            exhausted = True
            return
        if _max_comp(nbr, kept) > t:
            return
        if best is not None and len(W) > len(best):
            return
        if ci == len(classes):
            cand = sorted(W)
            if best is None or (len(cand), cand) < (len(best), best):
                best = cand
            return
        cls = classes[ci]
        for w in range(len(cls) + 1):
            add = 0
            for v in cls[w:]:
                add |= 1 << v
            dfs(ci + 1, kept | add, W + cls[:w])
            if exhausted:
                return

    dfs(0, 0, [])
    return best, nodes, exhausted


def _split_search(nbr, comps, classes, budget, best, key):
    # For a disconnected graph the optimum is min over t of t plus the
    # cheapest per-component cuts that cap every component at t.
    nodes = 0
    exhausted = False
    per = []
    for c in comps:
        members = [cl for cl in classes if (1 << cl[0]) & c]
        size = bin(c).count("1")
        cuts = {}
        for t in range(1, min(size, best[0]) + 1):
            W, n, ex = _capped_cut(nbr, members, t, max(1, budget - nodes))
            nodes += n
            exhausted |= ex
            cuts[t] = W if W is not None else sorted(_bits(c))
            if exhausted:
                break
        per.append((size, cuts))
    best_W = None
    top = max(size for size, _ in per)
    for t in range(1, top + 1):
        W = []
        for size, cuts in per:
            if t >= size:
                continue
            if t not in cuts:
                W = None
                break
            W += cuts[t]
        if W is None:
            continue
        cand = key(t + len(W), W)
        if cand < best:
            best, best_W = cand, sorted(W)
    if best_W is None:
        best_W = list(best[2])
    return best_W, nodes, exhausted


def find_partition(report: HRQFReport, budget: int = 2_000_000,
                   raise_on_budget: bool = False) -> HRQFReport:
    """Minimise |W| + largest component of G - W over separators W.

    Twin vertices are interchangeable, so only the number removed from each twin
    class matters. Ties prefer smaller separators, then the lexicographically
    smaller sorted separator.
    """
    adj = report.adjacency
    k = adj.shape[0]
    nbr = _masks(adj)
    full = (1 << k) - 1
    classes = twin_classes(adj)
    deg = [bin(m).count("1") for m in nbr]
    classes.sort(key=lambda c: (-deg[c[0]] * len(c), c[0]))

    def key(exp, W):
        return (exp, len(W), tuple(sorted(W)))

    best_W = []
    best = key(_max_comp(nbr, full), best_W)
    # greedy incumbent: peel highest-degree vertices
    alive, W = full, []
    while alive:
        v = max(_bits(alive), key=lambda u: (bin(nbr[u] & alive).count("1"), -u))
        if bin(nbr[v] & alive).count("1") == 0:
            break
        alive &= ~(1 << v)
        W.append(v)
        cand = key(len(W) + _max_comp(nbr, alive), W)
        if cand < best:
            best, best_W = cand, list(W)

    comps = [c for c in _components(nbr, full) if c & (c - 1)]
    if len(comps) > 1:
        best_W, nodes, exhausted = _split_search(nbr, comps, classes, budget, best, key)
        best = key(len(best_W) + _max_comp(nbr, full & ~sum(1 << v for v in best_W)), best_W)
    else:
        best_W, best, nodes, exhausted = _joint_search(nbr, classes, budget, best, best_W)
    if exhausted and raise_on_budget:
        raise BudgetExceeded(f"node budget {budget} exhausted", partial=best_W)

    W = sorted(best_W)
    alive = full & ~sum(1 << v for v in W)
    groups = sorted((sorted(_bits(c)) for c in _components(nbr, alive)), key=lambda g: g[0])
    exp = best[0]
    part = Partition(groups, W, exp, exact=not exhausted)
    if k > 2 and exp > k - 2:
        part = Partition([list(range(k))], [], k - 2, exact=not exhausted, gram_schmidt=True)
    report.partition = part
    report.search_nodes = nodes
    if exhausted:
        report.notes.append(f"search budget {budget} exhausted; result is heuristic")
    return report


def analyze(code: STCode, budget: int = 2_000_000) -> HRQFReport:
    return find_partition(hrqf(code), budget)


def partition_valid(adj: np.ndarray, part: Partition) -> bool:
    for a in range(len(part.groups)):
        for b in range(a + 1, len(part.groups)):
            if adj[np.ix_(part.groups[a], part.groups[b])].any():
                return False
    return True


# ---------------------------------------------------------------------------

def predicted_zero_mask(part: Partition) -> np.ndarray:
    """Strictly-upper R entries forced to zero, in the partition's ordering."""
    k = len(part.ordering)
    label = np.full(k, -1)
    pos = 0
    for g, grp in enumerate(part.groups):
        label[pos:pos + len(grp)] = g
        pos += len(grp)
    mask = np.zeros((k, k), dtype=bool)
    if part.gram_schmidt:
        return mask
    for i in range(k):
        for j in range(i + 1, k):
            if label[i] >= 0 and label[j] >= 0 and label[i] != label[j]:
                mask[i, j] = True
    return mask


def r_factor(code: STCode, H: np.ndarray, ordering) -> np.ndarray:
    HB = np.einsum("ab,kbc->kac", H, code.weights[list(ordering)])
    return np.linalg.qr(real_vectorize(HB), mode="r")


@dataclass
class RStructureReport:
    trials: int
    max_violation: float
    worst: tuple | None
    worst_seed: int | None
    n_d: int

    @property
    def passed(self) -> bool:
        return self.max_violation < 1e-9


def verify_r_structure(code: STCode, partition: Partition, trials: int = 100, tol: float = 1e-9,
                       seed: int = 0, n_d: int | None = None, strict: bool = True) -> RStructureReport:
    if n_d is None:
        n_d = max(1, math.ceil(code.k / (2 * code.T)))
    mask = predicted_zero_mask(partition)
    worst, worst_ij, worst_seed = 0.0, None, None
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        H = (rng.standard_normal((n_d, code.n)) + 1j * rng.standard_normal((n_d, code.n))) / math.sqrt(2)
        R = r_factor(code, H, partition.ordering)
        rel = np.abs(R) / np.linalg.norm(R)
        if mask.any():
            v = np.where(mask, rel, 0.0)
            idx = np.unravel_index(np.argmax(v), v.shape)
            if v[idx] > worst:
                worst, worst_ij, worst_seed = float(v[idx]), (int(idx[0]), int(idx[1])), t
    if strict and worst >= tol:
        o = partition.ordering
        raise StructureViolated(o[worst_ij[0]], o[worst_ij[1]], worst_seed, worst)
    return RStructureReport(trials, worst, worst_ij, worst_seed, n_d)
