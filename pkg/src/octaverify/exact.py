"""Integer substrate: p-adic valuations, Smith normal form, linear congruences.

Matrices are small and dense, so everything here is plain Python integers held in
tuples.  Arithmetic is checked against a magnitude cap so that an intermediate
blow-up is reported instead of silently producing a wrong certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ArithmeticOverflow, ContractError

INFINITY = math.inf

# Default bound on |entry| during elimination; mirrors a signed 64-bit word.
MAGNITUDE_CAP = 2**63 - 1


def valuation(a: int, p: int):
    """Largest v with p**v dividing a; ``INFINITY`` for a == 0."""
    if a == 0:
        return INFINITY
    a = abs(a)
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


@dataclass(frozen=True)
class IntMatrix:
    """Dense integer matrix; shape is stored explicitly so empty matrices keep it."""

    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ContractError(f"entries do not match shape {self.rows}x{self.cols}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(len(rows), cols, rows)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, size: int) -> "IntMatrix":
        return cls(size, size, tuple(tuple(int(i == j) for j in range(size)) for i in range(size)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, rc):
        r, c = rc
        return self.entries[r][c]

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ContractError(f"cannot multiply {self.shape} by {other.shape}")
        cols_b = list(zip(*other.entries)) if other.rows else [()] * other.cols
        out = tuple(
            tuple(sum(a * b for a, b in zip(row, col)) for col in cols_b) for row in self.entries
        )
        return IntMatrix(self.rows, other.cols, out)

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise ContractError(f"cannot add {self.shape} and {other.shape}")
        return IntMatrix(
            self.rows,
            self.cols,
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)),
        )

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(tuple(-a for a in r) for r in self.entries))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + (-other)

    def transpose(self) -> "IntMatrix":
        if self.rows == 0:
            return IntMatrix(self.cols, 0, tuple(() for _ in range(self.cols)))
        return IntMatrix(self.cols, self.rows, tuple(zip(*self.entries)))

    def is_diagonal(self) -> bool:
        return all(self.entries[i][j] == 0 for i in range(self.rows) for j in range(self.cols) if i != j)

    def diagonal(self) -> list[int]:
        return [self.entries[i][i] for i in range(min(self.rows, self.cols))]

    def max_abs(self) -> int:
        return max((abs(x) for r in self.entries for x in r), default=0)


def determinant(M: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if M.rows != M.cols:
        raise ContractError("determinant of a non-square matrix")
    n = M.rows
    if n == 0:
        return 1
    a = M.tolist()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class SnfResult:
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix

    def invariants(self) -> list[int]:
        return self.D.diagonal()


def _check(rows: Iterable[list[int]], cap: int):
    for r in rows:
        for x in r:
            if x > cap or -x > cap:
                raise ArithmeticOverflow(f"entry {x} exceeds magnitude cap {cap}")


def smith_normal_form(M: IntMatrix, cap: int = MAGNITUDE_CAP) -> SnfResult:
    """Return unimodular U, V with U @ M @ V = D in Smith normal form.

    Pivot rule: the nonzero entry of least absolute value in the active block,
    ties broken row-major.  Every non-final pass strictly lowers that minimum,
    which gives termination and makes the output a function of the input.
    """
    r, c = M.rows, M.cols
    a = M.tolist()
    U = [[int(i == j) for j in range(r)] for i in range(r)]
    V = [[int(i == j) for j in range(c)] for i in range(c)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        U[dst] = [x + q * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, q):  # col_dst += q * col_src
        for row in a:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    for t in range(min(r, c)):
        while True:
            best = None
            for i in range(t, r):
                for j in range(t, c):
                    x = abs(a[i][j])
                    if x and (best is None or x < best[0]):
                        best = (x, i, j)
            if best is None:
                break
            _, i, j = best
            if i != t:
                swap_rows(i, t)
            if j != t:
                swap_cols(j, t)
            piv = a[t][t]
            for i in range(t + 1, r):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // piv))
            for j in range(t + 1, c):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // piv))
            _check(a, cap)
            _check(U, cap)
            _check(V, cap)
            if any(a[i][t] for i in range(t + 1, r)) or any(a[t][j] for j in range(t + 1, c)):
                continue
            bad = next(
                ((i, j) for i in range(t + 1, r) for j in range(t + 1, c) if a[i][j] % piv),
                None,
            )
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]
    return SnfResult(
        IntMatrix.from_rows(U, r), IntMatrix.from_rows(a, c), IntMatrix.from_rows(V, c)
    )


def abelian_image_order(rows: Sequence[Sequence[int]], target_moduli: Sequence[int]) -> int:
    """Order of the image of Z^k -> (+)_j Z/target_moduli[j] sending e_i to rows[i]."""
    ncols = len(target_moduli)
    total = math.prod(target_moduli)
    if ncols == 0:
        return 1
    pres = [list(r) for r in rows] + [
        [q if i == j else 0 for j in range(ncols)] for i, q in enumerate(target_moduli)
    ]
    d = smith_normal_form(IntMatrix.from_rows(pres, ncols)).D.diagonal()
    return total // math.prod(d)


def solve_matrix_congruence(A: IntMatrix, B: IntMatrix, moduli: Sequence[int]) -> IntMatrix | None:
    """Find X with (A @ X)[:, j] == B[:, j] mod moduli[j] for every column j.

    Returns ``None`` exactly when some column has no solution.  Entries of the
    returned X are reduced modulo the modulus of their column.
    """
    if A.rows != B.rows or len(moduli) != B.cols:
        raise ContractError(
            f"shape mismatch: A {A.shape}, B {B.shape}, {len(moduli)} moduli"
        )
    if any(q <= 0 for q in moduli):
        raise ContractError("moduli must be positive")
    snf = smith_normal_form(A)
    U, D, V = snf.U, snf.D, snf.V
    k = A.cols
    rank_span = min(A.rows, A.cols)
    Ub = U @ B
    cols: list[list[int]] = []
    for j, q in enumerate(moduli):
        y = [0] * k
        for i in range(A.rows):
            rhs = Ub[i, j]
            d = D[i, i] if i < rank_span else 0
            g = math.gcd(d, q)
            if rhs % g:
                return None
            qq = q // g
            if qq > 1:
                y[i] = (rhs // g) * pow(d // g, -1, qq) % qq
        x = [sum(V[row, s] * y[s] for s in range(k)) % q for row in range(k)]
        cols.append(x)
    return IntMatrix(k, B.cols, tuple(tuple(cols[j][i] for j in range(B.cols)) for i in range(k)))
