"""Exact integer lattice algebra: Hermite and Smith normal forms, solving, kernels.

Matrices are lists of rows of Python ints. Lattices are always spanned by rows.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def hnf_with_transform(rows: list[list[int]], ncols: int | None = None):
    """Row-style HNF.

    Returns ``(H, U, rank)`` with ``U * rows == H``; the first ``rank`` rows of H
    are the nonzero echelon rows (positive pivots, entries above each pivot
    reduced into ``[0, pivot)``), the remaining rows are zero and the matching
    rows of U span the integer left kernel.
    """
    m = len(rows)
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    A = [list(r) for r in rows]
    U = identity(m)
    r = 0
    pivots = []
    for c in range(ncols):
        if r >= m:
            break
        # collect gcd into row r
        for i in range(r + 1, m):
            if A[i][c] == 0:
                continue
            a, b = A[r][c], A[i][c]
            g, x, y = _xgcd(a, b)
            p, q = a // g, b // g
            Ar, Ai = A[r], A[i]
            A[r] = [x * u + y * v for u, v in zip(Ar, Ai)]
            A[i] = [-q * u + p * v for u, v in zip(Ar, Ai)]
            Ur, Ui = U[r], U[i]
            U[r] = [x * u + y * v for u, v in zip(Ur, Ui)]
            U[i] = [-q * u + p * v for u, v in zip(Ur, Ui)]
        if A[r][c] == 0:
            continue
        if A[r][c] < 0:
            A[r] = [-v for v in A[r]]
            U[r] = [-v for v in U[r]]
        piv = A[r][c]
        for i in range(r):
            q = A[i][c] // piv
            if q:
                A[i] = [u - q * v for u, v in zip(A[i], A[r])]
                U[i] = [u - q * v for u, v in zip(U[i], U[r])]
        pivots.append(c)
        r += 1
    return A, U, r


def hnf(rows: list[list[int]], ncols: int | None = None) -> list[list[int]]:
    H, _, r = hnf_with_transform(rows, ncols)
    return H[:r]


def pivot_columns(H: list[list[int]]) -> list[int]:
    cols = []
    for row in H:
        for j, v in enumerate(row):
            if v:
                cols.append(j)
                break
    return cols


def reduce_vector(H: list[list[int]], v: list[int]) -> tuple[list[int], list[int]]:
    """Reduce v against HNF rows H. Returns (remainder, coefficients).

    The remainder is the canonical representative of v modulo the lattice when
    H has full column rank; v lies in the lattice iff the remainder is zero.
    """
    v = list(v)
    coeffs = [0] * len(H)
    for i, (row, c) in enumerate(zip(H, pivot_columns(H))):
        q = v[c] // row[c]
        if q:
            coeffs[i] = q
            v = [a - q * b for a, b in zip(v, row)]
    return v, coeffs


def solve_left(rows: list[list[int]], target: list[int]) -> list[int] | None:
    """Integer c with sum c_i rows_i == target, or None if none exists."""
    if not rows:
        return None if any(target) else []
    H, U, r = hnf_with_transform(rows, len(target))
    rem, y = reduce_vector(H[:r], target)
    if any(rem):
        return None
    m = len(rows)
    return [sum(y[k] * U[k][j] for k in range(r)) for j in range(m)]


def left_kernel(rows: list[list[int]], ncols: int | None = None) -> list[list[int]]:
    """Basis (HNF) of integer vectors c with c * rows == 0."""
    H, U, r = hnf_with_transform(rows, ncols)
    ker = U[r:]
    if not ker:
        return []
    return hnf(ker, len(rows))


def transpose(A: list[list]) -> list[list]:
    return [list(col) for col in zip(*A)] if A else []


def matmul(A, B):
    Bt = transpose(B)
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def det(A) -> Fraction | int:
    """Exact determinant by fraction-free Bareiss elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = [list(r) for r in A]
    if any(isinstance(v, Fraction) for r in M for v in r):
        M = [[Fraction(v) for v in r] for r in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                val = M[i][j] * M[k][k] - M[i][k] * M[k][j]
                M[i][j] = val / prev if isinstance(val, Fraction) else val // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def rational_solve(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """Solve the square system A x = b over Q; None if singular."""
    n = len(A)
    M = [[Fraction(v) for v in row] + [Fraction(bv)] for row, bv in zip(A, b)]
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c] != 0), None)
        if p is None:
            return None
        M[c], M[p] = M[p], M[c]
        inv = 1 / M[c][c]
        M[c] = [v * inv for v in M[c]]
        for i in range(n):
            if i != c and M[i][c] != 0:
                f = M[i][c]
                M[i] = [u - f * v for u, v in zip(M[i], M[c])]
    return [M[i][n] for i in range(n)]


def rational_inverse(A):
    n = len(A)
    cols = [rational_solve(A, [Fraction(int(i == j)) for i in range(n)]) for j in range(n)]
    if any(c is None for c in cols):
        raise ZeroDivisionError("singular matrix")
    return transpose(cols)


def snf(A: list[list[int]]):
    """Smith normal form ``U * A * V = D`` with unimodular U, V.

    Returns ``(diag, U, V)``; ``diag`` has length min(rows, cols) and each
    entry divides the next.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    D = [list(r) for r in A]
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(m, n):
        while True:
            # smallest nonzero entry of the remaining block becomes the pivot
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if D[i][j] and (best is None or abs(D[i][j]) < abs(D[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            piv = D[t][t]
            clean = True
            for i in range(t + 1, m):
                q = D[i][t] // piv
                if q:
                    D[i] = [a - q * b for a, b in zip(D[i], D[t])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[t])]
                if D[i][t]:
                    clean = False
            for j in range(t + 1, n):
                q = D[t][j] // piv
                if q:
                    for M in (D, V):
                        for row in M:
                            row[j] -= q * row[t]
                if D[t][j]:
                    clean = False
            if not clean:
                continue
            bad = None
            for i in range(t + 1, m):
                if any(D[i][j] % piv for j in range(t + 1, n)):
                    bad = i
                    break
            if bad is None:
                break
            D[t] = [a + b for a, b in zip(D[t], D[bad])]
            U[t] = [a + b for a, b in zip(U[t], U[bad])]
        if D[t][t] < 0:
            D[t] = [-v for v in D[t]]
            U[t] = [-v for v in U[t]]
        t += 1
    diag = [D[i][i] for i in range(min(m, n))]
    return diag, U, V


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b if a and b else 0
