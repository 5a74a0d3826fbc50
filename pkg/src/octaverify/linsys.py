"""Linear systems whose unknowns are morphism matrices over Z/p^m.

A system collects matrix equations of the form

    sum_k  L_k @ W_k @ R_k  ==  RHS        (entry (r, c) taken mod p^{f_c})

where each unknown W_k is a morphism between known objects.  Unknown entries
are parametrised as p^{max(0, f - e)} * y so every solution is automatically a
well-defined morphism, every row is rescaled to the common modulus p^m, and the
whole thing goes to one SNF-based congruence solve.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ContractError
from .exact import IntMatrix, solve_matrix_congruence


@dataclass
class _Unknown:
    src: tuple[int, ...]
    tgt: tuple[int, ...]
    offset: int


class CongruenceSystem:
    def __init__(self, ctx):
        self.ctx = ctx
        self._unknowns: list[_Unknown] = []
        self._nvars = 0
        self._rows: list[dict[int, int]] = []
        self._rhs: list[int] = []

    def unknown(self, src_exps, tgt_exps) -> int:
        src, tgt = tuple(src_exps), tuple(tgt_exps)
        self._unknowns.append(_Unknown(src, tgt, self._nvars))
        self._nvars += len(src) * len(tgt)
        return len(self._unknowns) - 1

    def equation(self, terms, rhs, tgt_exps):
        """Add sum(L @ W @ R) == rhs, reduced mod p^{tgt_exps[c]} in column c.

        ``terms`` holds (L, var, R) triples; L or R may be None for an identity.
        ``rhs`` is a list of rows (or an IntMatrix).
        """
        p, m = self.ctx.p, self.ctx.m
        if isinstance(rhs, IntMatrix):
            rhs = rhs.tolist()
        tgt_exps = tuple(tgt_exps)
        nrows = len(rhs)
        for L, var, R in terms:
            u = self._unknowns[var]
            if L is not None and (L.rows != nrows or L.cols != len(u.src)):
                raise ContractError(f"left factor {L.shape} does not fit unknown {var}")
            if L is None and len(u.src) != nrows:
                raise ContractError(f"unknown {var} has {len(u.src)} rows, equation has {nrows}")
            if R is not None and (R.rows != len(u.tgt) or R.cols != len(tgt_exps)):
                raise ContractError(f"right factor {R.shape} does not fit unknown {var}")
            if R is None and u.tgt != tgt_exps:
                raise ContractError(f"unknown {var} target does not match equation target")
        for r in range(nrows):
            for c, fc in enumerate(tgt_exps):
                if fc == 0:
                    continue
                scale = p ** (m - fc)
                coeffs: dict[int, int] = {}
                for L, var, R in terms:
                    u = self._unknowns[var]
                    ks = range(len(u.src)) if L is not None else (r,)
                    ls = range(len(u.tgt)) if R is not None else (c,)
                    for k in ks:
                        a = L[r, k] if L is not None else 1
                        if not a:
                            continue
                        for l in ls:
                            b = R[l, c] if R is not None else 1
                            if not b:
                                continue
                            s = max(0, u.tgt[l] - u.src[k])
                            idx = u.offset + k * len(u.tgt) + l
                            coeffs[idx] = coeffs.get(idx, 0) + a * b * p**s * scale
                self._rows.append(coeffs)
                self._rhs.append(rhs[r][c] * scale)

    def solve(self) -> list[list[list[int]]] | None:
        """One solution as a list of matrices (one per unknown), or None."""
        q = self.ctx.p ** self.ctx.m
        nv = self._nvars
        if not self._rows:
            y = [0] * nv
        else:
            A = IntMatrix.from_rows(
                [[row.get(j, 0) % q for j in range(nv)] for row in self._rows], nv
            )
            B = IntMatrix.from_rows([[b % q] for b in self._rhs], 1)
            X = solve_matrix_congruence(A, B, [q])
            if X is None:
                return None
            y = [X[i, 0] for i in range(nv)]
        p = self.ctx.p
        out = []
        for u in self._unknowns:
            mat = []
            for k, e in enumerate(u.src):
                row = []
                for l, f in enumerate(u.tgt):
                    s = max(0, f - e)
                    row.append(p**s * y[u.offset + k * len(u.tgt) + l] % p**f)
                mat.append(row)
            out.append(mat)
        return out
