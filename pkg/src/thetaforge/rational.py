"""Exact linear algebra over fractions.Fraction.

Matrices are lists of lists of Fraction, vectors are lists of Fraction.
Sizes in this package stay small (at most ~9x9), so plain fraction
Gaussian elimination is exact and fast enough; no clever pivoting for
numerical stability is needed, only nonzero pivots.
"""

from __future__ import annotations

from fractions import Fraction

from .exceptions import NonExactInput

Fr = Fraction


def as_fraction(x, allow_float: bool = False) -> Fraction:
    """Coerce a scalar to Fraction.

    Floats are exact binary rationals, so conversion is lossless, but most
    exact entry points want them rejected: pass allow_float=True only where
    rationalizing float input is the documented behavior.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise NonExactInput(f"bool is not a rational scalar: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        if not allow_float:
            raise NonExactInput(f"float entry {x!r} rejected; pass int, Fraction or 'p/q' string")
        return Fraction(x)
    try:
        # numpy integer scalars
        import numpy as np

        if isinstance(x, np.integer):
            return Fraction(int(x))
        if isinstance(x, np.floating):
            if not allow_float:
                raise NonExactInput(f"float entry {x!r} rejected; pass int, Fraction or 'p/q' string")
            return Fraction(float(x))
    except ImportError:  # pragma: no cover
        pass
    raise NonExactInput(f"cannot interpret {x!r} as a rational scalar")


def fvector(xs, allow_float: bool = False) -> list[Fraction]:
    return [as_fraction(x, allow_float) for x in xs]


def fmatrix(rows, allow_float: bool = False) -> list[list[Fraction]]:
    out = [fvector(row, allow_float) for row in rows]
    if out and any(len(r) != len(out[0]) for r in out):
        raise NonExactInput("ragged matrix")
    return out


def zeros(n: int, m: int) -> list[list[Fraction]]:
    return [[Fr(0)] * m for _ in range(n)]


def identity(n: int) -> list[list[Fraction]]:
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = Fr(1)
    return out


def transpose(A):
    return [list(col) for col in zip(*A)]


def mat_mul(A, B):
    n, k = len(A), len(B)
    m = len(B[0]) if B else 0
    out = zeros(n, m)
    for i in range(n):
        Ai = A[i]
        for j in range(m):
            out[i][j] = sum(Ai[t] * B[t][j] for t in range(k))
    return out


def mat_vec(A, v):
    return [sum(Ai[t] * v[t] for t in range(len(v))) for Ai in A]


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def det(A) -> Fraction:
    """Exact determinant by fraction Gaussian elimination."""
    n = len(A)
    if n == 0:
        return Fr(1)
    M = [row[:] for row in A]
    sign = 1
    d = Fr(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return Fr(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            sign = -sign
        p = M[col][col]
        d *= p
        for r in range(col + 1, n):
            f = M[r][col] / p
            if f:
                Mr = M[r]
                Mc = M[col]
                for c in range(col, n):
                    Mr[c] -= f * Mc[c]
    return d * sign


def solve(A, b):
    """Solve A x = b exactly. Raises ZeroDivisionError on singular A."""
    n = len(A)
    M = [A[i][:] + [b[i]] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [x / p for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


def inverse(A):
    n = len(A)
    M = [A[i][:] + identity(n)[i] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [x / p for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [row[n:] for row in M]


def _minor(A, i, j):
    return [[A[r][c] for c in range(len(A)) if c != j] for r in range(len(A)) if r != i]


def cofactor(A, i, j) -> Fraction:
    s = Fr(-1) if (i + j) % 2 else Fr(1)
    return s * det(_minor(A, i, j))


def cofactor_matrix(A):
    """Matrix of cofactors C[i][j] = (-1)^(i+j) det(minor(i,j)).

    For nonsingular A this is det(A) * inverse(A)^T, which is much cheaper
    than 2n^2 minors; singular A falls back to minors.
    """
    n = len(A)
    d = det(A)
    if d != 0:
        Ainv = inverse(A)
        return [[d * Ainv[j][i] for j in range(n)] for i in range(n)]
    return [[cofactor(A, i, j) for j in range(n)] for i in range(n)]


def inertia(S) -> tuple[int, int, int]:
    """Exact inertia (n_plus, n_minus, n_zero) of a symmetric matrix.

    Symmetric elimination with diagonal pivots; when the whole remaining
    diagonal vanishes, a nonzero off-diagonal pair [[0,h],[h,0]] contributes
    (+1,-1) and both rows are eliminated with the 2x2 block inverse.
    """
    n = len(S)
    M = [row[:] for row in S]
    alive = list(range(n))
    pos = neg = zero = 0
    while alive:
        piv = next((i for i in alive if M[i][i] != 0), None)
        if piv is not None:
            p = M[piv][piv]
            if p > 0:
                pos += 1
            else:
                neg += 1
            alive.remove(piv)
            for r in alive:
                f = M[r][piv] / p
                if f:
                    for c in alive:
                        M[r][c] -= f * M[piv][c]
            continue
        hit = None
        for ii, i in enumerate(alive):
            for j in alive[ii + 1:]:
                if M[i][j] != 0:
                    hit = (i, j)
                    break
            if hit:
                break
        if hit is None:
            zero += len(alive)
            break
        i, j = hit
        h = M[i][j]
        pos += 1
        neg += 1
        alive.remove(i)
        alive.remove(j)
        # Schur update with inv([[0,h],[h,0]]) = [[0,1/h],[1/h,0]]
        for r in alive:
            bi, bj = M[r][i], M[r][j]
            if bi or bj:
                for c in alive:
                    M[r][c] -= (bi * M[j][c] + bj * M[i][c]) / h
    return pos, neg, zero


def is_positive_definite(S) -> bool:
    n = len(S)
    return inertia(S) == (n, 0, 0)


def is_negative_definite(S) -> bool:
    n = len(S)
    return inertia(S) == (0, n, 0)


def nullspace(A) -> list[list[Fraction]]:
    """Exact basis of the right nullspace of A (rows may be fewer than cols)."""
    if not A:
        return []
    rows, cols = len(A), len(A[0])
    M = [row[:] for row in A]
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        p = M[r][c]
        M[r] = [x / p for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fr(0)] * cols
        v[fc] = Fr(1)
        for i, pc in enumerate(pivots):
            v[pc] = -M[i][fc]
        basis.append(v)
    return basis


def gram(form_matrix, vectors):
    """Gram matrix G_ij = v_i^T A v_j for columns given as a list of vectors."""
    Av = [mat_vec(form_matrix, v) for v in vectors]
    return [[dot(vectors[i], Av[j]) for j in range(len(vectors))] for i in range(len(vectors))]


def to_float_matrix(A):
    import numpy as np

    return np.array([[float(x) for x in row] for row in A], dtype=float)


def to_float_vector(v):
    import numpy as np

    return np.array([float(x) for x in v], dtype=float)
