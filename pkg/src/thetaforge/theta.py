"""Indefinite theta series with sign-cone and error-function kernels.

theta_mu[phi, lambda](tau, b, c) = tau_2^{-lambda/2} sum over k in
Lambda + mu + p/2 of e^{pi i B(k,p)} phi(sqrt(2 tau_2)(k+b)) q^{-Q(k+b)/2}
e^{2 pi i B(c, k+b/2)}.

Kernels: the holomorphic sign-cone restriction

    phi_r(x) = 2^{-r} prod_j [sign B(c_j, x) - sign B(c'_j, x)]

(scale invariant, sign(0) = 0) and its modular completion

    phi_hat_r(x) = 2^{-r} sum_{P subseteq [r]} (-1)^{|P|} E^A(C^P; x),

where C^P takes c'_j on P and c_j off P, so that phi_hat -> phi as all
|B(., x)| grow. Convergence and every tail bound rest on the exact cone
certificate: on the support of phi_r, Q(k) <= Q_-(k) <= -gamma P_+(k) for
the positive definite majorant P_+ built from |A|'s eigenvalues, and for
the completed kernel the same holds sector by sector through the (S, P)
recursion of the certificate. Enumeration covers the ellipsoid
P_+(k + offset + b) <= R^2; the remainder is bounded by an analytic
Gaussian shell integral, so the radius doubles without re-enumeration
until the bound sits below the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from scipy.linalg import eigh as generalized_eigh
from scipy.special import erf, gammaincc, gamma as gamma_fn

from . import rational as ra
from .boosted import BoostedArgument, build_cone, eval_E_boosted
from .cones import ConePair, ConeSystemReport, check_cone_pair
from .exceptions import BudgetExceeded, ValidationError
from .quadform import BilinearForm

WALL_HIT_CAP = 1000


@dataclass(frozen=True)
class TruncationPolicy:
    tol: float = 1e-8
    initial_radius: float | None = None
    max_points: int = 10_000_000

    def __post_init__(self):
        if self.tol <= 0:
            raise ValidationError("tol must be positive")
        if self.max_points < 1:
            raise ValidationError("max_points must be positive")


@dataclass(frozen=True)
class ThetaValue:
    value: complex
    n_points: int
    tail_estimate: float
    wall_hits: list


@dataclass(frozen=True)
class QTerm:
    exponent: Fraction
    coefficient: Fraction
    wall_affected: bool


@dataclass(frozen=True)
class QExpansion:
    """Exact holomorphic q-expansion: value = e^{pi i phase_exponent} *
    sum coefficient * q^exponent, coefficients pure rationals."""

    terms: tuple
    phase_exponent: Fraction
    n_points: int
    radius: float


@dataclass(frozen=True, eq=False)
class ThetaSpec:
    """Evaluation request: lattice Z^n with form A, class mu in Lambda*/Lambda,
    characteristic vector p, elliptic variables b and c_ell, tau in the upper
    half plane, weight offset lam (0 for the built-in kernels), kernel
    selector ('holomorphic' | 'completed' | callable), and the cone pair."""

    form: BilinearForm
    mu: tuple
    p: tuple
    b: np.ndarray
    c_ell: np.ndarray
    tau: complex
    lam: int = 0
    kernel: object = "holomorphic"
    pair: ConePair | None = None

    def __post_init__(self):
        n = self.form.n
        object.__setattr__(self, "mu", tuple(ra.as_fraction(x) for x in self.mu))
        object.__setattr__(self, "p", tuple(int(x) for x in self.p))
        object.__setattr__(self, "b", np.atleast_1d(np.asarray(self.b, dtype=float)))
        object.__setattr__(self, "c_ell", np.atleast_1d(np.asarray(self.c_ell, dtype=float)))
        object.__setattr__(self, "tau", complex(self.tau))
        if len(self.mu) != n or len(self.p) != n:
            raise ValidationError("mu and p must have the form's dimension")
        if self.b.shape != (n,) or self.c_ell.shape != (n,):
            raise ValidationError("b and c_ell must have the form's dimension")
        if self.tau.imag <= 0:
            raise ValidationError("tau must lie in the upper half plane")
        if isinstance(self.kernel, str) and self.kernel not in ("holomorphic", "completed"):
            raise ValidationError(f"unknown kernel {self.kernel!r}")
        if isinstance(self.kernel, str):
            if self.pair is None:
                raise ValidationError("built-in kernels require a cone pair")
            if self.lam != 0:
                raise ValidationError("built-in kernels have lambda = 0")
            if self.pair.r > 0 and self.pair.form.rows != self.form.rows:
                raise ValidationError("cone pair and spec use different forms")
        A = self.form.exact()
        for i in range(n):
            amu = sum(A[i][j] * self.mu[j] for j in range(n))
            if amu.denominator != 1:
                raise ValidationError(
                    f"mu is not a class in the dual lattice: (A mu)_{i} = {amu}")
            diag = A[i][i] + sum(A[i][j] * self.p[j] for j in range(n))
            if diag % 2 != 0:
                raise ValidationError(
                    f"p is not characteristic: Q(e_{i}) + B(e_{i}, p) = {diag} is odd")

    @property
    def offset(self) -> tuple:
        return tuple(self.mu[i] + Fraction(self.p[i], 2) for i in range(self.form.n))


def discriminant_group(form: BilinearForm) -> list:
    """Coset representatives of Lambda*/Lambda in [0,1)^n, sorted; the group
    is generated by the columns of A^{-1} mod 1, closed by breadth-first
    search; its order is |det A|."""
    n = form.n
    Ainv = ra.inverse([list(r) for r in form.exact()])
    gens = [tuple(Ainv[i][j] % 1 for i in range(n)) for j in range(n)]
    zero = tuple(Fraction(0) for _ in range(n))
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for v in frontier:
            for g in gens:
                w = tuple((a + b) % 1 for a, b in zip(v, g))
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    out = sorted(seen)
    expected = abs(int(ra.det([list(r) for r in form.exact()])))
    if len(out) != expected:
        raise ValidationError(
            f"discriminant group closure found {len(out)} classes, |det A| = {expected}")
    return out


def _tree_sum(arr: np.ndarray) -> complex:
    """Deterministic pairwise summation, independent of any partitioning."""
    v = arr.astype(complex, copy=True)
    while v.shape[0] > 1:
        if v.shape[0] % 2:
            v = np.concatenate([v, [0.0 + 0.0j]])
        v = v[0::2] + v[1::2]
    return complex(v[0]) if v.shape[0] else 0.0 + 0.0j


def _is_exact_vector(x) -> bool:
    return all(isinstance(v, (int, Fraction, np.integer)) for v in x)


def kernel_phi(pair: ConePair, x):
    """phi_r(x) = 2^{-r} prod_j [sign B(c_j,x) - sign B(c'_j,x)], exact
    Fraction for exact input, float otherwise; sign(0) = 0."""
    value, _ = kernel_phi_signs(pair, x)
    return value


def kernel_phi_signs(pair: ConePair, x):
    """(phi_r(x), hit) where hit flags a vanishing sign argument."""
    if _is_exact_vector(x):
        xv = [ra.as_fraction(v) for v in x]
        A = [list(r) for r in pair.form.exact()]
        Ax = ra.mat_vec(A, xv)
        prod = Fraction(1)
        hit = False
        for c, cp in zip(pair.C, pair.C_prime):
            s1 = ra.dot(list(c), Ax)
            s2 = ra.dot(list(cp), Ax)
            if s1 == 0 or s2 == 0:
                hit = True
            f = ((s1 > 0) - (s1 < 0)) - ((s2 > 0) - (s2 < 0))
            if f == 0:
                return Fraction(0), hit
            prod *= Fraction(f, 2)
        return prod, hit
    xf = np.asarray(x, dtype=float)
    Af = pair.form.matrix()
    Cf = np.array([[float(v) for v in col] for col in pair.C]).T
    Cpf = np.array([[float(v) for v in col] for col in pair.C_prime]).T
    s1 = Cf.T @ Af @ xf
    s2 = Cpf.T @ Af @ xf
    hit = bool(np.any(s1 == 0.0) or np.any(s2 == 0.0))
    val = float(np.prod((np.sign(s1) - np.sign(s2)) / 2.0))
    return val, hit


class _PairRuntime:
    """Float-side data derived from an exact cone certificate, cached per
    pair: majorant frame, decay rates, and the 2^r completion cones."""

    def __init__(self, pair: ConePair, report: ConeSystemReport):
        self.pair = pair
        self.report = report
        A = pair.form.matrix()
        self.A = A
        self.n = pair.n
        self.r = pair.r
        self.C = np.array([[float(v) for v in col] for col in pair.C]).T \
            if pair.r else np.zeros((pair.n, 0))
        self.Cp = np.array([[float(v) for v in col] for col in pair.C_prime]).T \
            if pair.r else np.zeros((pair.n, 0))
        w, V = np.linalg.eigh(A)
        self.P_plus = (V * np.abs(w)) @ V.T
        self.chol_u = np.linalg.cholesky(self.P_plus).T
        self.covol = abs(float(np.linalg.det(self.chol_u)))
        self.cell_d = 0.5 * float(np.sum(np.linalg.norm(self.chol_u, axis=0)))
        self.q_minus = np.array([[float(v) for v in row] for row in report.q_minus])
        self.gamma_holo = self._min_gen_eig(-self.q_minus)
        self.gamma_hat, self.K_hat = self._completed_sectors()
        self._p_cones = None

    def _min_gen_eig(self, G: np.ndarray) -> float:
        vals = generalized_eigh(0.5 * (G + G.T), self.P_plus, eigvals_only=True)
        g = float(vals[0])
        if g <= 0:
            raise ValidationError(
                f"tail decay rate is not positive ({g:.3e}); certificate inconsistent")
        return g

    def _completed_sectors(self):
        gammas = []
        K = 0.0
        A = self.A
        eye = np.eye(self.n)
        items = [((), (), self.report)]
        for (S, P), rep in self.report.recursion_reports.items():
            items.append((S, P, rep))
        for S, P, rep in items:
            K += 2.0 ** (-len(S)) * math.factorial(len(S))
            if rep.q_minus is None:
                raise ValidationError("nested certificate lacks Q_-; verdict must pass")
            Qm = np.array([[float(v) for v in row] for row in rep.q_minus])
            if S:
                cols = [self.Cp[:, j] if j in P else self.C[:, j] for j in S]
                Ch = np.column_stack(cols)
                Pr = Ch @ np.linalg.solve(Ch.T @ A @ Ch, Ch.T @ A)
            else:
                Pr = np.zeros((self.n, self.n))
            G = Pr.T @ A @ Pr - (eye - Pr).T @ Qm @ (eye - Pr)
            gammas.append(self._min_gen_eig(G))
        return min(gammas), K

    def p_cones(self):
        if self._p_cones is None:
            cones = {}
            for mask in range(2 ** self.r):
                P = tuple(j for j in range(self.r) if mask >> j & 1)
                cols = np.column_stack(
                    [self.Cp[:, j] if j in P else self.C[:, j] for j in range(self.r)]) \
                    if self.r else np.zeros((self.n, 0))
                cones[P] = build_cone(cols, self.pair.form)
            self._p_cones = cones
        return self._p_cones


_RUNTIME_CACHE: dict = {}


def _pair_runtime(pair: ConePair) -> _PairRuntime:
    rt = _RUNTIME_CACHE.get(pair)
    if rt is None:
        report = check_cone_pair(pair)
        if not report.passed:
            raise ValidationError(
                f"cone pair fails its certificate (first_failed = {report.first_failed})")
        rt = _PairRuntime(pair, report)
        _RUNTIME_CACHE[pair] = rt
    return rt


def kernel_phi_hat(pair: ConePair, x) -> float:
    """2^{-r} sum_P (-1)^{|P|} E^A(C^P; x); smooth, and approaches
    kernel_phi once every |B(c_j, x)|, |B(c'_j, x)| is large."""
    rt = _pair_runtime(pair)
    xf = np.asarray(x, dtype=float)
    if rt.r == 1:
        return float(_phi_hat_r1(rt, xf.reshape(1, -1))[0])
    total = 0.0
    for P, cone in rt.p_cones().items():
        ev = eval_E_boosted(BoostedArgument(cone=cone, x=xf))
        total += (-1.0) ** len(P) * ev.value
    return total / 2.0 ** rt.r


def _phi_hat_r1(rt: _PairRuntime, X: np.ndarray) -> np.ndarray:
    """Vectorized r=1 completed kernel: one erf per cone vector.

    E^A(c; x) = erf(sqrt(pi) B(c,x) / sqrt(Q(c))).
    """
    c = rt.C[:, 0]
    cp = rt.Cp[:, 0]
    qc = float(c @ rt.A @ c)
    qcp = float(cp @ rt.A @ cp)
    b1 = X @ (rt.A @ c) / math.sqrt(qc)
    b2 = X @ (rt.A @ cp) / math.sqrt(qcp)
    return 0.5 * (erf(math.sqrt(math.pi) * b1) - erf(math.sqrt(math.pi) * b2))


class _CountExceeded(Exception):
    pass


def _enumerate_shifts(U: np.ndarray, t: np.ndarray, radius: float, max_points: int) -> np.ndarray:
    """All integer m with ||U (m + t)||^2 <= radius^2, U upper triangular.

    Lexicographic in (m_{n-1}, ..., m_0); the innermost coordinate is
    vectorized. Raises _CountExceeded past max_points.
    """
    n = U.shape[0]
    rad2 = radius * radius
    out = []
    count = 0
    m = np.zeros(n, dtype=np.int64)

    def rec(i: int, rem2: float, shift: np.ndarray):
        # row i contributes (U_ii (m_i + t_i) + shift_i)^2; shift holds the
        # already-fixed columns j > i folded into rows 0..i
        nonlocal count
        uii = U[i, i]
        center = -t[i] - shift[i] / uii
        half = math.sqrt(max(rem2, 0.0)) / abs(uii)
        lo = math.ceil(center - half - 1e-12)
        hi = math.floor(center + half + 1e-12)
        if hi < lo:
            return
        if i == 0:
            ms = np.arange(lo, hi + 1, dtype=np.int64)
            v = uii * (ms + t[0]) + shift[0]
            ok = ms[v * v <= rem2 + 1e-12]
            count += len(ok)
            if count > max_points:
                raise _CountExceeded
            for m0 in ok:
                m[0] = m0
                out.append(m.copy())
            return
        for mi in range(lo, hi + 1):
            v = uii * (mi + t[i]) + shift[i]
            rem_next = rem2 - v * v
            if rem_next < -1e-12:
                continue
            m[i] = mi
            rec(i - 1, max(rem_next, 0.0), shift + U[:, i] * (mi + t[i]))

    rec(n - 1, rad2, np.zeros(n))
    if not out:
        return np.zeros((0, n), dtype=np.int64)
    return np.array(out, dtype=np.int64)


def _shell_tail(a: float, R: float, d: float, n: int, covol: float) -> float:
    """Bound on sum over lattice points with ||z|| > R of e^{-a(||z||)^2}
    via cells of diameter bound 2d:

        (omega_{n-1}/covol) int_{R-d}^inf rho^{n-1} e^{-a (rho-d)^2} drho.

    Requires R > 2d; the integral is a finite incomplete-gamma sum.
    """
    X = R - 2.0 * d
    if X <= 0:
        return math.inf
    total = 0.0
    aX2 = a * X * X
    for i in range(n):
        # int_X^inf sigma^i e^{-a sigma^2} dsigma
        s = (i + 1) / 2.0
        integral = gamma_fn(s) * gammaincc(s, aX2) / (2.0 * a ** s)
        total += comb(n - 1, i) * d ** (n - 1 - i) * integral
    omega = 2.0 * math.pi ** (n / 2.0) / gamma_fn(n / 2.0)
    return omega / covol * total


def enumerate_lattice(spec: ThetaSpec, radius: float, max_points: int = 10_000_000) -> np.ndarray:
    """Integer shifts m such that P_+(m + offset + b) <= radius^2, where the
    summation variable is k = m + offset, offset = mu + p/2. Deterministic
    lexicographic order."""
    if isinstance(spec.kernel, str):
        rt = _pair_runtime(spec.pair)
        t = np.array([float(o) for o in spec.offset]) + spec.b
        return _enumerate_shifts(rt.chol_u, t, radius, max_points)
    A = spec.form.matrix()
    w, V = np.linalg.eigh(A)
    P_plus = (V * np.abs(w)) @ V.T
    U = np.linalg.cholesky(P_plus).T
    t = np.array([float(o) for o in spec.offset]) + spec.b
    return _enumerate_shifts(U, t, radius, max_points)


def _holo_phi_vals(rt: _PairRuntime, Y: np.ndarray):
    """Vectorized holomorphic kernel on rows of Y, plus wall-hit mask.

    phi_r is scale invariant so Y may be k+b without the sqrt(2 tau_2)."""
    s1 = Y @ (rt.A @ rt.C)
    s2 = Y @ (rt.A @ rt.Cp)
    scale = max(float(np.max(np.abs(s1), initial=0.0)),
                float(np.max(np.abs(s2), initial=0.0)), 1.0)
    hits = (np.abs(s1) <= 1e-12 * scale) | (np.abs(s2) <= 1e-12 * scale)
    vals = np.prod((np.sign(s1) - np.sign(s2)) / 2.0, axis=1)
    return vals, hits.any(axis=1)


def _assemble_value(spec: ThetaSpec, m: np.ndarray, rt: _PairRuntime | None):
    n = spec.form.n
    A = spec.form.matrix()
    off = np.array([float(o) for o in spec.offset])
    K = m + off
    Y = K + spec.b
    tau = spec.tau
    Qy = np.einsum("ki,ij,kj->k", Y, A, Y)
    p = np.array(spec.p, dtype=float)
    Bkp = K @ (A @ p)
    Bc = (K + spec.b / 2.0) @ (A @ spec.c_ell)
    wall_hits = []
    if spec.kernel == "holomorphic":
        phi, hits = _holo_phi_vals(rt, Y)
        for idx in np.nonzero(hits)[0][:WALL_HIT_CAP]:
            wall_hits.append(tuple(Fraction(int(m[idx, i])) + spec.offset[i]
                                   for i in range(n)))
        # support bound Q(y) <= Q_-(y) wherever phi != 0; certificate guarantee
        sup = phi != 0
        if np.any(sup):
            Qm_y = np.einsum("ki,ij,kj->k", Y[sup], rt.q_minus, Y[sup])
            slack = Qm_y - Qy[sup]
            if np.min(slack) < -1e-9 * max(1.0, float(np.max(np.abs(Qy[sup])))):
                raise ValidationError(
                    "support point violates Q <= Q_-; certificate inconsistent")
    elif spec.kernel == "completed":
        X = math.sqrt(2.0 * tau.imag) * Y
        if rt.r == 1:
            phi = _phi_hat_r1(rt, X)
        else:
            phi = np.array([kernel_phi_hat(rt.pair, X[i]) for i in range(X.shape[0])])
    else:
        X = math.sqrt(2.0 * tau.imag) * Y
        phi = np.array([complex(spec.kernel(X[i])) for i in range(X.shape[0])])
    # combine kernel magnitude and q-power in log space: off-support points have
    # phi = 0 but arbitrarily positive Q(y), and exp alone would overflow
    phi = np.asarray(phi)
    mag = np.abs(phi)
    sup = mag > 0.0
    terms = np.zeros(Y.shape[0], dtype=complex)
    if np.any(sup):
        z = (1j * math.pi * Bkp[sup] - 1j * math.pi * tau * Qy[sup]
             + 2j * math.pi * Bc[sup] + np.log(mag[sup]))
        terms[sup] = (phi[sup] / mag[sup]) * np.exp(z)
    value = tau.imag ** (-spec.lam / 2.0) * _tree_sum(terms)
    return value, wall_hits


def eval_theta(spec: ThetaSpec, policy: TruncationPolicy = TruncationPolicy()) -> ThetaValue:
    """Sums the series inside an ellipsoid P_+ <= R^2 with R doubled until
    the analytic Gaussian tail bound (times safety factor 2) is below
    policy.tol. User kernels get a heuristic Cauchy tail instead: R doubles
    until the added shell contributes less than tol twice in a row.

    Raises BudgetExceeded carrying the best partial ThetaValue if the
    enumeration would exceed policy.max_points.
    """
    tau2 = spec.tau.imag
    if isinstance(spec.kernel, str):
        rt = _pair_runtime(spec.pair)
        gamma = rt.gamma_holo if spec.kernel == "holomorphic" else rt.gamma_hat
        Kpre = 1.0 if spec.kernel == "holomorphic" else rt.K_hat
        a = math.pi * tau2 * gamma
        R = policy.initial_radius or max(3.0, 2.0 * rt.cell_d + 1.0)
        R = max(R, 2.0 * rt.cell_d + 0.5)
        lam_pre = tau2 ** (-spec.lam / 2.0)
        while 2.0 * Kpre * lam_pre * _shell_tail(a, R, rt.cell_d, rt.n, rt.covol) > policy.tol:
            R *= 2.0
        tail = 2.0 * Kpre * lam_pre * _shell_tail(a, R, rt.cell_d, rt.n, rt.covol)
        t = np.array([float(o) for o in spec.offset]) + spec.b
        try:
            m = _enumerate_shifts(rt.chol_u, t, R, policy.max_points)
        except _CountExceeded:
            m, R_fit = _largest_feasible(rt.chol_u, t, R, policy.max_points)
            value, hits = _assemble_value(spec, m, rt)
            tail_fit = 2.0 * Kpre * lam_pre * _shell_tail(a, R_fit, rt.cell_d, rt.n, rt.covol)
            partial = ThetaValue(value=value, n_points=m.shape[0],
                                 tail_estimate=tail_fit, wall_hits=hits)
            raise BudgetExceeded(
                f"enumeration at radius {R:.3g} exceeds max_points={policy.max_points}",
                partial=partial)
        value, hits = _assemble_value(spec, m, rt)
        return ThetaValue(value=value, n_points=m.shape[0], tail_estimate=tail,
                          wall_hits=hits)
    return _eval_theta_user(spec, policy)


def _largest_feasible(U, t, R, max_points):
    while R > 1.0:
        R /= 2.0
        try:
            return _enumerate_shifts(U, t, R, max_points), R
        except _CountExceeded:
            continue
    return np.zeros((0, U.shape[0]), dtype=np.int64), 0.0


def _eval_theta_user(spec: ThetaSpec, policy: TruncationPolicy) -> ThetaValue:
    A = spec.form.matrix()
    w, V = np.linalg.eigh(A)
    P_plus = (V * np.abs(w)) @ V.T
    U = np.linalg.cholesky(P_plus).T
    t = np.array([float(o) for o in spec.offset]) + spec.b
    R = policy.initial_radius or 3.0
    stable = 0
    try:
        m = _enumerate_shifts(U, t, R, policy.max_points)
    except _CountExceeded:
        raise BudgetExceeded(
            f"user-kernel enumeration at radius {R:.3g} exceeds max_points", partial=None)
    value, _ = _assemble_value(spec, m, None)
    increment = math.inf
    while stable < 2:
        R *= 2.0
        try:
            m_new = _enumerate_shifts(U, t, R, policy.max_points)
        except _CountExceeded:
            raise BudgetExceeded(
                f"user-kernel enumeration at radius {R:.3g} exceeds max_points",
                partial=ThetaValue(value=value, n_points=m.shape[0],
                                   tail_estimate=increment, wall_hits=[]))
        m = m_new
        new_value, _ = _assemble_value(spec, m, None)
        increment = abs(new_value - value)
        stable = stable + 1 if increment <= policy.tol else 0
        value = new_value
    return ThetaValue(value=value, n_points=m.shape[0], tail_estimate=increment,
                      wall_hits=[])


def q_expansion(spec: ThetaSpec, n_terms: int,
                policy: TruncationPolicy = TruncationPolicy()) -> QExpansion:
    """Exact q-expansion of the holomorphic theta: groups support points by
    the exponent -Q(k)/2 and sums e^{pi i B(k,p)} phi_r(k) exactly per class.

    The class-constant phase e^{pi i (B(mu,p) + Q(p)/2)} is factored out as
    phase_exponent, leaving pure rational coefficients ((-1)^{B(m,p)} times
    phi values); they are integers when no wall hit touches the class.
    Completeness: on the support P_+(k) <= -Q(k)/gamma, so every class with
    exponent <= gamma R^2 / 2 is provably complete inside radius R; R
    doubles until n_terms complete classes exist.
    """
    if spec.kernel != "holomorphic":
        raise ValidationError("q-expansion requires the holomorphic kernel")
    if np.any(spec.b != 0) or np.any(spec.c_ell != 0):
        raise ValidationError("q-expansion requires b = c = 0")
    if n_terms < 1:
        raise ValidationError("n_terms must be positive")
    rt = _pair_runtime(spec.pair)
    Aex = [list(r) for r in spec.form.exact()]
    off = spec.offset
    gamma_lb = rt.gamma_holo * (1.0 - 1e-9)
    R = max(3.0, 2.0 * rt.cell_d + 0.5)
    t = np.array([float(o) for o in off])
    while True:
        try:
            m = _enumerate_shifts(rt.chol_u, t, R, policy.max_points)
        except _CountExceeded:
            raise BudgetExceeded(
                f"q-expansion enumeration at radius {R:.3g} exceeds max_points",
                partial=None)
        qm_ex = [list(r) for r in rt.report.q_minus]
        classes: dict = {}
        for row in m:
            k = [Fraction(int(row[i])) + off[i] for i in range(spec.form.n)]
            phi, hit = kernel_phi_signs(spec.pair, k)
            if phi == 0 and not hit:
                continue
            Ak = ra.mat_vec(Aex, k)
            if phi != 0:
                # exact support certificate: Q(k) <= Q_-(k)
                qk = ra.dot(k, Ak)
                qmk = ra.dot(k, ra.mat_vec(qm_ex, k))
                if qk > qmk:
                    raise ValidationError(
                        f"support point {tuple(k)} violates Q <= Q_- exactly")
            expo = -ra.dot(k, Ak) / 2
            bmp = sum(int(row[i]) * spec.p[j] * Aex[i][j]
                      for i in range(spec.form.n) for j in range(spec.form.n))
            contrib = phi if bmp % 2 == 0 else -phi
            cur = classes.get(expo)
            if cur is None:
                classes[expo] = [contrib, hit]
            else:
                cur[0] += contrib
                cur[1] = cur[1] or hit
        complete_cut = Fraction(gamma_lb * R * R / 2.0).limit_denominator(10 ** 12)
        complete = sorted(e for e in classes if e <= complete_cut)
        if len(complete) >= n_terms:
            complete = complete[:n_terms]
            break
        R *= 2.0
    terms = tuple(QTerm(exponent=e, coefficient=classes[e][0], wall_affected=classes[e][1])
                  for e in complete)
    mu_p = sum(Fraction(spec.p[i]) * ra.dot([Fraction(a) for a in Aex[i]], list(spec.mu))
               for i in range(spec.form.n))
    qp = sum(Fraction(spec.p[i]) * Aex[i][j] * spec.p[j]
             for i in range(spec.form.n) for j in range(spec.form.n))
    phase = (mu_p + Fraction(qp, 2)) % 2
    return QExpansion(terms=terms, phase_exponent=phase, n_points=int(m.shape[0]),
                      radius=R)
