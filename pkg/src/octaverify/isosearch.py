"""Exhaustive search for periodic isomorphisms between two diagrams.

Unknowns are the components at j/i, 0 <= i < j <= n.  Components on the
column are the shifts of the bottom row, so periodicity holds by
construction.  Positions are assigned bottom row first, then the inner
columns left to right; each step keeps only the candidates compatible with
every commutativity constraint whose other end is already known.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context
from typing import Mapping

import numpy as np

from . import stable
from .diagram import (
    PeriodicDiagram,
    Pos,
    format_pos,
    in_strip,
    is_zero_position,
    resolve,
    stored_positions,
    unit_steps,
)
from .errors import ContractError, EnumerationTooLarge
from .exact import IntMatrix
from .stable import StableMorphism, compose, stable_core
from .verdict import Verdict


@dataclass(frozen=True)
class DiagramIso:
    left: PeriodicDiagram
    right: PeriodicDiagram
    components: Mapping[Pos, StableMorphism] = field(hash=False)

    @classmethod
    def from_matrices(cls, left, right, overrides: Mapping[Pos, list] | None = None) -> "DiagramIso":
        """Identity at every stored position except those in ``overrides``."""
        overrides = overrides or {}
        comps = {}
        for pos in stored_positions(left.n):
            X, Y = left.objects[pos], right.objects[pos]
            if pos in overrides:
                comps[pos] = StableMorphism.make(left.ctx, X, Y, overrides[pos])
            else:
                if X != Y:
                    raise ContractError(f"identity component at {format_pos(pos, left.n)} between different objects")
                comps[pos] = stable.identity(left.ctx, X)
        return cls(left, right, comps)

    def component_at(self, pos: Pos) -> StableMorphism:
        n, N = self.left.n, self.left.N
        P0, k = resolve(pos, n)
        if is_zero_position(P0, n):
            return stable.zero(self.left.ctx, self.left.object_at(pos), self.right.object_at(pos))
        if P0[0] == N:
            f = stable.shift_morphism(self.components[(P0[1], 0)])
        else:
            f = self.components[P0]
        return stable.shift_morphism(f) if k % 2 else f

    def as_rows(self) -> dict[str, list[list[int]]]:
        n = self.left.n
        return {format_pos(pos, n): f.rows() for pos, f in sorted(self.components.items(), key=lambda kv: (kv[0][1], kv[0][0]))}


def verify_diagram_iso(iso: DiagramIso) -> Verdict:
    """Recheck an isomorphism from scratch on a window of the strip.

    Every stored component must be stably invertible (decided by the linear
    solver, not by the search's filter), and every unit step with source
    alpha in [0, N] must commute.
    """
    L, R = iso.left, iso.right
    n, N = L.n, L.N
    if (L.ctx, L.n) != (R.ctx, R.n):
        return Verdict.failed("diagrams have different parameters")
    for pos, f in iso.components.items():
        if (f.source, f.target) != (L.objects[pos], R.objects[pos]):
            return Verdict.failed("component has the wrong ends", position=format_pos(pos, n))
        if not stable.is_stable_iso(f):
            return Verdict.failed("component is not invertible", position=format_pos(pos, n))
    checked = 0
    for a in range(0, N + 1):
        for b in range(a, a + N + 1):
            P = (b, a)
            for Q in ((b + 1, a), (b, a + 1)):
                if not in_strip(Q, n):
                    continue
                lhs = compose(iso.component_at(P), R.arrow(P, Q))
                rhs = compose(L.arrow(P, Q), iso.component_at(Q))
                checked += 1
                if lhs != rhs:
                    return Verdict.failed("square does not commute", step=f"{P}->{Q}")
    return Verdict.passed(squares_checked=checked)


# --- search ------------------------------------------------------------------------


def search_order(n: int) -> list[Pos]:
    """Bottom row 1/0 .. n/0, then inner columns j = 2..n from the bottom up."""
    order = [(j, 0) for j in range(1, n + 1)]
    for j in range(2, n + 1):
        order += [(j, i) for i in range(1, j)]
    return order


def _unit_blocks_ok(cands: np.ndarray, src, tgt, p: int, m: int) -> np.ndarray:
    keep = np.ones(len(cands), dtype=bool)
    for e in range(1, m):
        rs = [r for r, x in enumerate(src) if x == e]
        cs = [c for c, x in enumerate(tgt) if x == e]
        if len(rs) != len(cs):
            return np.zeros(len(cands), dtype=bool)
        if not rs:
            continue
        block = cands[:, rs][:, :, cs] % p
        if len(rs) == 1:
            keep &= block[:, 0, 0] != 0
        elif len(rs) == 2:
            det = block[:, 0, 0] * block[:, 1, 1] - block[:, 0, 1] * block[:, 1, 0]
            keep &= det % p != 0
        else:
            keep &= np.array(
                [stable._rank_mod_p(b.tolist(), p) == len(rs) for b in block], dtype=bool
            )
    return keep


def _candidates(ctx, X, Y, dtype) -> np.ndarray:
    """All canonical stable isomorphisms X -> Y as an array (K, rows, cols)."""
    p, m = ctx.p, ctx.m
    size = stable.stable_hom_size(ctx, X, Y)
    if size > ctx.max_enum:
        raise EnumerationTooLarge(f"stable Hom({X}, {Y})", size, ctx.max_enum)
    r, c = X.rank, Y.rank
    axes = [
        np.arange(0, p ** stable.stable_modulus_exp(m, e, f), p ** max(0, f - e), dtype=np.int64)
        for e in X.exponents
        for f in Y.exponents
    ]
    if axes:
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, r * c)
    else:
        grid = np.zeros((1, 0), dtype=np.int64)
    cands = grid.reshape(-1, r, c)
    cands = cands[_unit_blocks_ok(cands, X.exponents, Y.exponents, p, m)]
    return cands.astype(dtype)


def _shift_array(cands: np.ndarray, src, tgt, p: int) -> np.ndarray:
    out = cands[:, ::-1, ::-1].copy()
    R, C = len(src), len(tgt)
    for r, e in enumerate(src):
        for c, f in enumerate(tgt):
            rr, cc = R - 1 - r, C - 1 - c
            if e >= f:
                out[:, rr, cc] = out[:, rr, cc] * p ** (e - f)
            else:
                out[:, rr, cc] = out[:, rr, cc] // p ** (f - e)
    return out


@dataclass
class _Constraint:
    ref_p: tuple[int, bool] | None  # (order index, shifted) of the component at P
    ref_q: tuple[int, bool] | None
    L: np.ndarray  # left diagram map P -> Q
    R: np.ndarray  # right diagram map P -> Q
    M: np.ndarray  # moduli of the composite
    label: str


class _BudgetExhausted(Exception):
    pass


@dataclass
class SearchResult:
    status: str  # "complete" or "inconclusive"
    isos: list
    nodes: int
    mode: str

    def __iter__(self):
        return iter(self.isos)

    def __len__(self):
        return len(self.isos)

    @property
    def complete(self) -> bool:
        return self.status == "complete"


class _Searcher:
    def __init__(self, left: PeriodicDiagram, right: PeriodicDiagram):
        ctx = left.ctx
        self.ctx, self.n = ctx, left.n
        self.left, self.right = left, right
        p, m = ctx.p, ctx.m
        maxrank = max([X.rank for X in left.objects.values()] + [1])
        self.dtype = np.int64 if (p**m) ** 2 * maxrank * 4 < 2**62 else object
        self.order = search_order(self.n)
        index = {pos: t for t, pos in enumerate(self.order)}
        N = self.n + 1
        self.cands = []
        self.shifted = []
        for pos in self.order:
            X, Y = left.objects[pos], right.objects[pos]
            cs = _candidates(ctx, X, Y, self.dtype)
            self.cands.append(cs)
            self.shifted.append(_shift_array(cs, X.exponents, Y.exponents, p) if pos[1] == 0 else None)

        def ref(pos):
            if is_zero_position(pos, self.n):
                return None
            if pos[0] == N:
                return (index[(pos[1], 0)], True)
            return (index[pos], False)

        self.by_level: list[list[_Constraint]] = [[] for _ in self.order]
        for P, Q in unit_steps(self.n):
            rp, rq = ref(P), ref(Q)
            if rp is None or rq is None:
                continue
            lp = left.objects[P]
            rq_obj = right.objects[Q]
            M = np.array(
                [[p ** stable.stable_modulus_exp(m, e, f) for f in rq_obj.exponents] for e in lp.exponents],
                dtype=self.dtype,
            ).reshape(lp.rank, rq_obj.rank)
            Lm = np.array(left.maps[(P, Q)].rows(), dtype=self.dtype).reshape(lp.rank, left.objects[Q].rank)
            Rm = np.array(right.maps[(P, Q)].rows(), dtype=self.dtype).reshape(right.objects[P].rank, rq_obj.rank)
            level = max(rp[0], rq[0])
            self.by_level[level].append(
                _Constraint(rp, rq, Lm, Rm, M, f"{format_pos(P, self.n)}->{format_pos(Q, self.n)}")
            )

    def _matrix(self, ref, assigned, t):
        idx, shifted = ref
        arr = self.shifted[idx] if shifted else self.cands[idx]
        if idx == t:
            return arr
        return arr[assigned[idx]]

    def filter(self, t: int, assigned: list[int]) -> np.ndarray:
        K = len(self.cands[t])
        keep = np.ones(K, dtype=bool)
        for c in self.by_level[t]:
            A = self._matrix(c.ref_p, assigned, t)
            B = self._matrix(c.ref_q, assigned, t)
            diff = A @ c.R - c.L @ B
            ok = (diff % c.M == 0)
            if ok.ndim == 3:
                keep &= ok.all(axis=(1, 2))
            elif not ok.all():
                return np.zeros(0, dtype=np.int64)
            if not keep.any():
                break
        return np.nonzero(keep)[0]

    def to_iso(self, assigned) -> DiagramIso:
        comps = {}
        for t, pos in enumerate(self.order):
            # candidates are canonical already
            comps[pos] = StableMorphism(
                self.ctx,
                self.left.objects[pos],
                self.right.objects[pos],
                IntMatrix.from_rows(self.cands[t][assigned[t]].tolist(), self.right.objects[pos].rank),
            )
        return DiagramIso(self.left, self.right, comps)

    def run(self, mode: str, budget: int | None, prefix: list[int] | None = None):
        """Depth-first search; returns (list of assignments, nodes, exhausted)."""
        depth = len(self.order)
        assigned = [0] * depth
        found = []
        nodes = 0
        start = 0
        if prefix:
            for t, k in enumerate(prefix):
                assigned[t] = k
            start = len(prefix)

        def dfs(t):
            nonlocal nodes
            if t == depth:
                found.append(list(assigned))
                return mode == "first"
            for k in self.filter(t, assigned):
                nodes += 1
                if budget is not None and nodes > budget:
                    raise _BudgetExhausted
                assigned[t] = int(k)
                if dfs(t + 1):
                    return True
            return False

        try:
            dfs(start)
        except _BudgetExhausted:
            return found, nodes, True
        return found, nodes, False


def _subtree(args):
    searcher, k0, mode, budget = args
    return searcher.run(mode, budget, prefix=[k0])


def find_periodic_isos(
    left: PeriodicDiagram,
    right: PeriodicDiagram,
    mode: str = "first",
    budget: int | None = None,
    workers: int = 1,
) -> SearchResult:
    """All (or the first) periodic isomorphisms left -> right, within ``budget`` nodes.

    A node is one tentative assignment of a component.  If the budget runs
    out the status is "inconclusive" and the isomorphisms found so far are
    returned; otherwise the search was exhaustive.
    """
    if mode not in ("first", "all"):
        raise ContractError(f"mode must be 'first' or 'all', not {mode!r}")
    if left.ctx != right.ctx or left.n != right.n:
        raise ContractError("diagrams must share p, m and n")
    for pos in stored_positions(left.n):
        if stable_core(left.objects[pos]) != stable_core(right.objects[pos]):
            return SearchResult("complete", [], 0, mode)
    s = _Searcher(left, right)
    if workers <= 1 or not s.order:
        found, nodes, exhausted = s.run(mode, budget)
    else:
        top = [int(k) for k in s.filter(0, [0] * len(s.order))]
        nodes = len(top)
        found, exhausted = [], False
        if budget is not None and nodes > budget:
            exhausted = True
            top = []
        sub_budget = None if budget is None else budget - nodes
        with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("spawn")) as ex:
            results = list(ex.map(_subtree, [(s, k, mode, sub_budget) for k in top]))
        for sol, cnt, exh in results:
            nodes += cnt
            found.extend(sol)
            if exh or (budget is not None and nodes > budget):
                exhausted = True
                break
            if mode == "first" and found:
                break
    isos = [s.to_iso(a) for a in found]
    if mode == "first":
        isos = isos[:1]
    return SearchResult("inconclusive" if exhausted else "complete", isos, nodes, mode)


def bottom_row_congruence(iso: DiagramIso, modulus: int) -> bool:
    """Whether the (1x1) components on the bottom row agree modulo ``modulus``."""
    vals = []
    for j in range(1, iso.left.n + 1):
        f = iso.components[(j, 0)]
        if f.matrix.shape != (1, 1):
            raise ContractError("bottom-row components must be 1x1 for this check")
        vals.append(f.matrix[0, 0] % modulus)
    return len(set(vals)) <= 1
