"""Exact rational linear-program feasibility (dense Phase-I simplex).

Only feasibility questions of the form  "does {y >= 0 : M y <= d} contain
a point?"  are needed (the l_inf epsilon-KKT certificate on a polytope).
Bland's rule guarantees termination; all arithmetic is in Fractions.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def feasible_nonneg(M: Sequence[Sequence], d: Sequence) -> bool:
    """Decide whether  {y >= 0 : M y <= d}  is nonempty (exactly)."""
    m = len(M)
    if m == 0:
        return True
    n = len(M[0])
    rows = [[Fraction(v) for v in row] for row in M]
    rhs = [Fraction(v) for v in d]

    # slack variables make it  M y + s = d ;  flip rows with negative rhs and
    # give them artificial variables, then minimize the artificial sum.
    art_rows = [i for i in range(m) if rhs[i] < 0]
    if not art_rows:
        return True
    n_art = len(art_rows)
    width = n + m + n_art  # y, s, a columns
    tab = []
    basis = []
    art_col = {}
    for k, i in enumerate(art_rows):
        art_col[i] = n + m + k
    for i in range(m):
        row = [Fraction(0)] * (width + 1)
        sign = -1 if i in art_col else 1
        for j in range(n):
            row[j] = sign * rows[i][j]
        row[n + i] = Fraction(sign)
        row[width] = sign * rhs[i]
        if i in art_col:
            row[art_col[i]] = Fraction(1)
            basis.append(art_col[i])
        else:
            basis.append(n + i)
        tab.append(row)

    # objective: minimize the artificial sum; with artificials basic the
    # reduced-cost row is the sum of their rows, artificial columns zeroed.
    obj = [Fraction(0)] * (width + 1)
    for i in art_rows:
        for j in range(width + 1):
            obj[j] += tab[i][j]
    for i in art_rows:
        obj[art_col[i]] = Fraction(0)

    def pivot(pr: int, pc: int) -> None:
        piv = tab[pr][pc]
        inv = Fraction(1) / piv
        tab[pr] = [v * inv for v in tab[pr]]
        prow = tab[pr]
        for r in range(m):
            if r != pr and tab[r][pc] != 0:
                f = tab[r][pc]
                tab[r] = [a - f * b for a, b in zip(tab[r], prow)]
        if obj[pc] != 0:
            f = obj[pc]
            for j in range(width + 1):
                obj[j] -= f * prow[j]
        basis[pr] = pc

    while True:
        # Bland: smallest index with positive reduced cost (maximizing -sum a)
        pc = -1
        for j in range(width):
            if obj[j] > 0:
                pc = j
                break
        if pc < 0:
            break
        pr = -1
        best = None
        for r in range(m):
            if tab[r][pc] > 0:
                ratio = tab[r][width] / tab[r][pc]
                if best is None or ratio < best or (
                    ratio == best and basis[r] < basis[pr]
                ):
                    best = ratio
                    pr = r
        if pr < 0:
            break  # unbounded phase-one cannot happen, but stay safe
        pivot(pr, pc)

    return obj[width] == 0
