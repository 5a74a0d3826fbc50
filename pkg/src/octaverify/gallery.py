"""Generators for the example diagrams, parametrised by (n, p) with m = 2n."""

from __future__ import annotations

from .diagram import EDiagram, PeriodicDiagram, restrict
from .errors import ContractError
from .modcat import Context

NAMES = ("Y", "X", "Xtilde", "OctX", "OctXtilde")


def _context(n: int, p: int) -> Context:
    if n < 3:
        raise ContractError(f"the example diagrams need n >= 3, got {n}")
    return Context(p, 2 * n)


def gen_Y(n: int, p: int) -> EDiagram:
    """Module-level diagram on the triangle for n' = 2n - 1, with Z/p^{j-i} at j/i."""
    ctx = _context(n, p)
    nn = 2 * n - 1
    N = nn + 1
    objects = {(j, i): ctx.obj(j - i) for i in range(N + 1) for j in range(i + 1, N + 1)}
    maps = {}
    for i in range(N):
        for j in range(i + 1, N):
            maps[((j, i), (j + 1, i))] = [[-p if (j + 1 == N and i >= 1) else p]]
    for i in range(N):
        for j in range(i + 2, N + 1):
            maps[((j, i), (j, i + 1))] = [[-1 if (j, i) == (N, 0) else 1]]
    return EDiagram.build(ctx, nn, objects, maps)


def _x_data(n: int, p: int):
    ctx = _context(n, p)
    m = 2 * n
    objects = {}
    maps = {}
    for j in range(1, n + 1):
        objects[(j, 0)] = ctx.obj(n)
    for i in range(1, n):
        for j in range(i + 1, n + 1):
            objects[(j, i)] = ctx.obj(j - i, m - j + i)
    for j in range(1, n):
        maps[((j, 0), (j + 1, 0))] = [[p]]
    for j in range(2, n + 1):
        maps[((j, 0), (j, 1))] = [[1, p ** (n + 1 - j)]]
    for i in range(1, n):
        for j in range(i + 1, n):
            maps[((j, i), (j + 1, i))] = [[p, 0], [0, 1]]
        maps[((n, i), (n + 1, i))] = [[-(p**i)], [1]]
        for j in range(i + 2, n + 1):
            maps[((j, i), (j, i + 1))] = [[1, 0], [0, p]]
    return ctx, objects, maps


def gen_X(n: int, p: int) -> PeriodicDiagram:
    ctx, objects, maps = _x_data(n, p)
    return PeriodicDiagram.build(ctx, n, objects, maps)


def gen_Xtilde(n: int, p: int) -> PeriodicDiagram:
    """Same base as X; two maps around n/1 carry an extra p^{n-3}."""
    ctx, objects, maps = _x_data(n, p)
    q = p ** (n - 3)
    maps[((n - 1, 1), (n, 1))] = [[p, 0], [q, 1]]
    maps[((n, 1), (n, 2))] = [[1, 0], [-q, p]]
    return PeriodicDiagram.build(ctx, n, objects, maps)


def tilde_positions(n: int):
    """The two unit steps where X and Xtilde differ."""
    return [((n - 1, 1), (n, 1)), ((n, 1), (n, 2))]


def generate(name: str, n: int, p: int):
    if name == "Y":
        return gen_Y(n, p)
    if name == "X":
        return gen_X(n, p)
    if name == "Xtilde":
        return gen_Xtilde(n, p)
    if name in ("OctX", "OctXtilde"):
        if n != 3:
            raise ContractError(f"{name} is defined for n = 3 only")
        return gen_X(3, p) if name == "OctX" else gen_Xtilde(3, p)
    raise ContractError(f"unknown gallery name {name!r}; expected one of {', '.join(NAMES)}")


def known_witness_components(k: int, n: int, p: int) -> dict:
    """Component matrices (restricted coordinates) of the explicit isomorphism
    restrict(X, k) -> restrict(Xtilde, k); positions not listed are identities."""
    if not 0 <= k <= n:
        raise ContractError(f"k must lie in [0, {n}]")
    if k in (1, n):
        return {}
    if k == 0:
        return {(n - 1, 0): [[1, 0], [p ** (n - 3), 1]]}
    out = {}
    for i in range(1, k):
        for j in range(k, n):
            if (j, i) != (n - 1, 1):
                out[(j, i)] = [[1, 0], [-(p ** (j - 1 - i)), 1]]
    return out


def known_witness_iso(k: int, n: int, p: int):
    from .isosearch import DiagramIso

    left, right = restrict(gen_X(n, p), k), restrict(gen_Xtilde(n, p), k)
    return DiagramIso.from_matrices(left, right, known_witness_components(k, n, p))
