"""Exact convergence certificates for indefinite theta cone pairs.

A pair (C, C') of r + r integer (or rational) vectors on a signature
(r, n-r) form is admissible when, writing Delta for the Gram determinant of
the interleaved family (c_1, c'_1, ..., c_r, c'_r), D_{j,j'} for the Gram
cofactor at the (c_j, c'_j) position and M for the cofactor matrix with the
D_{j,j'}, D_{j',j} entries zeroed:

  * every mixed choice C^P (one of c_j / c'_j per index) spans a positive
    definite r-dimensional subspace,
  * Delta (-1)^r > 0,
  * D_{j,j'} (-1)^r >= 0 for every j,
  * (-1)^r M is negative definite,
  * the same holds recursively for the complement pairs projected
    A-orthogonally to any mixed choice on any subset S (all (S, P)),

and then Q_-(x) = Q(x) - (2/Delta) sum_j D_{j,j'} B(c_j,x) B(c'_j,x) is
negative definite, which drives every Gaussian tail bound downstream. All
checks run in exact rational arithmetic; float input is rejected.

Projections compose (projecting perpendicular to V then to the projection
of W equals projecting perpendicular to V + W), so the (S, P) recursion is
memoized on the set of globally chosen vectors: 3^r distinct systems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from . import rational as ra
from .exceptions import NonExactInput, ZeroDelta
from .quadform import BilinearForm, signature

CONDITION_ORDER = (
    "signature",
    "cp_positive_definite",
    "delta_sign",
    "cofactor_sign",
    "reduced_cofactor_negative_definite",
    "recursion",
    "q_minus_negative_definite",
)


def _exact_columns(mat, n_expected=None) -> tuple:
    rows = ra.fmatrix(mat)
    n = len(rows)
    if n_expected is not None and n != n_expected:
        raise ValueError(f"matrix has {n} rows, expected {n_expected}")
    ncols = len(rows[0])
    return tuple(tuple(rows[i][j] for i in range(n)) for j in range(ncols))


@dataclass(frozen=True, eq=False)
class ConePair:
    """Exact cone pair: columns of C and C_prime index-paired, on `form`."""

    C: tuple
    C_prime: tuple
    form: BilinearForm

    @classmethod
    def from_matrices(cls, C, C_prime, form: BilinearForm) -> "ConePair":
        try:
            cols = _exact_columns(C, form.n)
            cols_p = _exact_columns(C_prime, form.n)
        except NonExactInput:
            raise
        if len(cols) != len(cols_p):
            raise ValueError("C and C' must have the same number of columns")
        return cls(C=cols, C_prime=cols_p, form=form)

    @property
    def r(self) -> int:
        return len(self.C)

    @property
    def n(self) -> int:
        return self.form.n


@dataclass(eq=False)
class ConeSystemReport:
    delta: Fraction
    cofactors_jjprime: tuple
    reduced_cofactor_matrix: tuple
    per_P_positive_definite: dict
    q_minus: tuple | None
    q_minus_inertia: tuple | None
    conditions: dict
    first_failed: str | None
    verdict: str
    n_pairs: int
    recursion_reports: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _bil(A, x, y) -> Fraction:
    return ra.dot(ra.mat_vec(A, list(y)), list(x))


def _gram_of(A, vectors):
    return [[_bil(A, v, w) for w in vectors] for v in vectors]


def _project_off(A, basis, basis_gram, v):
    """v minus its A-orthogonal projection onto span(basis)."""
    rhs = [_bil(A, b, v) for b in basis]
    coeff = ra.solve([row[:] for row in basis_gram], rhs)
    out = list(v)
    for c, b in zip(coeff, basis):
        for i in range(len(out)):
            out[i] -= c * b[i]
    return tuple(out)


def _interleave(cs, cps):
    out = []
    for c, cp in zip(cs, cps):
        out.append(c)
        out.append(cp)
    return out


def _zeroed_cofactor_matrix(cof, r):
    M = [row[:] for row in cof]
    for j in range(r):
        M[2 * j][2 * j + 1] = Fraction(0)
        M[2 * j + 1][2 * j] = Fraction(0)
    return M


def _negated(mat):
    return [[-x for x in row] for row in mat]


def _is_negative_definite(mat) -> bool:
    if len(mat) == 0:
        return True
    return ra.is_positive_definite(_negated(mat))


def _q_minus_matrix(A, delta, cofs, cs, cps):
    """A - (1/Delta) sum_j D_{j,j'} (A c_j c'_j^T A + A c'_j c_j^T A)."""
    n = len(A)
    out = [row[:] for row in A]
    for D, c, cp in zip(cofs, cs, cps):
        if D == 0:
            continue
        Ac = ra.mat_vec(A, list(c))
        Acp = ra.mat_vec(A, list(cp))
        w = D / delta
        for i in range(n):
            for j in range(n):
                out[i][j] -= w * (Ac[i] * Acp[j] + Acp[i] * Ac[j])
    return out


def _complement_basis(A, chosen_vecs, n):
    """Exact basis of the A-orthocomplement of span(chosen_vecs)."""
    if not chosen_vecs:
        return [list(row) for row in ra.identity(n)]
    rows = [ra.mat_vec(A, list(v)) for v in chosen_vecs]
    return [list(b) for b in ra.nullspace(rows)]


def _restrict(mat, basis):
    cols = [ra.mat_vec(mat, b) for b in basis]
    return [[ra.dot(basis[i], cols[j]) for j in range(len(basis))] for i in range(len(basis))]


class _Checker:
    def __init__(self, pair: ConePair):
        self.pair = pair
        self.A = [list(row) for row in pair.form.exact()]
        self.n = pair.n
        self.r = pair.r
        self.memo: dict = {}

    def top_report(self) -> ConeSystemReport:
        return self._system(frozenset())

    def _chosen_vectors(self, chosen):
        out = []
        for j, which in sorted(chosen):
            out.append(self.pair.C_prime[j] if which else self.pair.C[j])
        return out

    def _system(self, chosen: frozenset) -> ConeSystemReport:
        if chosen in self.memo:
            return self.memo[chosen]
        report = self._build_report(chosen)
        self.memo[chosen] = report
        return report

    def _build_report(self, chosen: frozenset) -> ConeSystemReport:
        A = self.A
        taken = {j for j, _ in chosen}
        remaining = [j for j in range(self.r) if j not in taken]
        rp = len(remaining)
        chosen_vecs = self._chosen_vectors(chosen)
        conditions = {}

        # signature is a standing hypothesis; only meaningful at top level
        if not chosen:
            sig = signature(self.pair.form)
            conditions["signature"] = sig == (self.r, self.n - self.r)

        cs, cps, degenerate = [], [], False
        if chosen_vecs:
            gram_ch = _gram_of(A, chosen_vecs)
            if ra.det([row[:] for row in gram_ch]) == 0:
                degenerate = True
            else:
                for j in remaining:
                    cs.append(_project_off(A, chosen_vecs, gram_ch, self.pair.C[j]))
                    cps.append(_project_off(A, chosen_vecs, gram_ch, self.pair.C_prime[j]))
        else:
            cs = [self.pair.C[j] for j in remaining]
            cps = [self.pair.C_prime[j] for j in remaining]

        if degenerate:
            conditions["degenerate_projection"] = False
            report = ConeSystemReport(
                delta=Fraction(0), cofactors_jjprime=(), reduced_cofactor_matrix=(),
                per_P_positive_definite={}, q_minus=None, q_minus_inertia=None,
                conditions=conditions, first_failed="degenerate_projection",
                verdict="fail", n_pairs=rp)
            return report

        per_P = {}
        ok_cp = True
        for k in range(rp + 1):
            for P in combinations(range(rp), k):
                vecs = [cps[j] if j in P else cs[j] for j in range(rp)]
                flag = ra.is_positive_definite(_gram_of(A, vecs)) if vecs else True
                per_P[P] = flag
                ok_cp = ok_cp and flag
        conditions["cp_positive_definite"] = ok_cp

        inter = _interleave(cs, cps)
        gram = _gram_of(A, inter)
        delta = ra.det([row[:] for row in gram])
        sign_r = -1 if rp % 2 else 1
        conditions["delta_sign"] = sign_r * delta > 0

        if delta != 0:
            cof = ra.cofactor_matrix(gram)
            cofs = tuple(cof[2 * j][2 * j + 1] for j in range(rp))
            conditions["cofactor_sign"] = all(sign_r * D >= 0 for D in cofs)
            M = _zeroed_cofactor_matrix(cof, rp)
            Msigned = M if sign_r == 1 else _negated(M)
            conditions["reduced_cofactor_negative_definite"] = _is_negative_definite(Msigned)
            reduced = tuple(tuple(row) for row in M)
        else:
            cofs = ()
            reduced = ()
            conditions["cofactor_sign"] = False
            conditions["reduced_cofactor_negative_definite"] = False

        recursion_reports = {}
        ok_rec = True
        for k in range(1, rp + 1):
            for S in combinations(range(rp), k):
                for kp in range(len(S) + 1):
                    for Ploc in combinations(S, kp):
                        child = chosen | {(remaining[j], 1 if j in Ploc else 0) for j in S}
                        rep = self._system(frozenset(child))
                        recursion_reports[(S, Ploc)] = rep
                        ok_rec = ok_rec and rep.passed
        conditions["recursion"] = ok_rec

        q_minus = None
        q_inertia = None
        if rp == 0:
            q_mat = [row[:] for row in A]
        elif delta != 0:
            q_mat = _q_minus_matrix(A, delta, cofs, cs, cps)
        else:
            q_mat = None
        if q_mat is not None:
            basis = _complement_basis(A, chosen_vecs, self.n)
            if len(basis) != self.n - len(chosen_vecs):
                conditions["q_minus_negative_definite"] = False
            else:
                restr = _restrict(q_mat, basis)
                q_inertia = ra.inertia(restr)
                conditions["q_minus_negative_definite"] = (
                    q_inertia[0] == 0 and q_inertia[2] == 0)
            q_minus = tuple(tuple(row) for row in q_mat)
        else:
            conditions["q_minus_negative_definite"] = False

        first_failed = None
        for name in CONDITION_ORDER:
            if name in conditions and not conditions[name]:
                first_failed = name
                break
        verdict = "pass" if first_failed is None else "fail"
        return ConeSystemReport(
            delta=delta, cofactors_jjprime=cofs, reduced_cofactor_matrix=reduced,
            per_P_positive_definite=per_P, q_minus=q_minus, q_minus_inertia=q_inertia,
            conditions=conditions, first_failed=first_failed, verdict=verdict,
            n_pairs=rp, recursion_reports=recursion_reports)


def check_cone_pair(pair: ConePair) -> ConeSystemReport:
    """Runs every Theorem-style hypothesis exactly, including the full
    (S, P) recursion, and reports the first failed condition."""
    return _Checker(pair).top_report()


def q_minus_form(pair: ConePair):
    """Exact matrix of Q_-; raises ZeroDelta when the Gram determinant is 0."""
    A = [list(row) for row in pair.form.exact()]
    inter = _interleave(list(pair.C), list(pair.C_prime))
    gram = _gram_of(A, inter)
    delta = ra.det([row[:] for row in gram])
    if delta == 0:
        raise ZeroDelta("Gram determinant of (C, C') vanishes")
    cof = ra.cofactor_matrix(gram)
    cofs = tuple(cof[2 * j][2 * j + 1] for j in range(pair.r))
    return tuple(tuple(row) for row in _q_minus_matrix(A, delta, cofs, list(pair.C), list(pair.C_prime)))


def det_identity_residual(pair: ConePair, x) -> Fraction:
    """Exact residual of the bordered-Gram identity

        Delta(x, c_1, c'_1, ..., c_r, c'_r) = Delta Q_-(x) - X^T M X,

    which must vanish identically; nonzero means an indexing bug upstream.
    """
    x = ra.fvector(x)
    A = [list(row) for row in pair.form.exact()]
    inter = _interleave(list(pair.C), list(pair.C_prime))
    gram_big = _gram_of(A, [tuple(x)] + inter)
    lhs = ra.det([row[:] for row in gram_big])
    gram = _gram_of(A, inter)
    delta = ra.det([row[:] for row in gram])
    if delta == 0:
        raise ZeroDelta("Gram determinant of (C, C') vanishes")
    cof = ra.cofactor_matrix(gram)
    cofs = tuple(cof[2 * j][2 * j + 1] for j in range(pair.r))
    qm = _q_minus_matrix(A, delta, cofs, list(pair.C), list(pair.C_prime))
    q_minus_x = ra.dot(ra.mat_vec(qm, list(x)), list(x))
    M = _zeroed_cofactor_matrix(cof, pair.r)
    X = [_bil(A, v, x) for v in inter]
    xmx = ra.dot(ra.mat_vec(M, X), X)
    return lhs - (delta * q_minus_x - xmx)


def build_a4_example() -> ConePair:
    """The bundled non-factorizable rank-4 instance on the signature (4,4)
    form [[G(A4), -I4], [-I4, 0]]; passes check_cone_pair."""
    G = [[2, -1, 0, 0], [-1, 2, -1, 0], [0, -1, 2, -1], [0, 0, -1, 2]]
    A = [[0] * 8 for _ in range(8)]
    for i in range(4):
        for j in range(4):
            A[i][j] = G[i][j]
        A[i][4 + i] = -1
        A[4 + i][i] = -1
    form = BilinearForm.from_rows(A)

    def e(i):
        v = [0] * 8
        v[i] = 1
        return v

    def minus(a, b):
        return [x - y for x, y in zip(a, b)]

    C = [e(0), e(1), e(2), e(3)]
    Cp = [minus(e(0), e(5)), minus(e(1), e(6)), minus(e(2), e(7)), minus(e(3), e(4))]
    cols = lambda vs: [[vs[j][i] for j in range(4)] for i in range(8)]
    return ConePair.from_matrices(cols(C), cols(Cp), form)


def build_r1_example() -> ConePair:
    """Minimal rank-1 instance on diag(1, -1): c = (1,0), c' = (2,1)."""
    form = BilinearForm.from_rows([[1, 0], [0, -1]])
    return ConePair.from_matrices([[1], [0]], [[2], [1]], form)
