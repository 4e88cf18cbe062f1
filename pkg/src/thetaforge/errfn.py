"""Generalized error functions E_r and their complements M_r.

E_r(M; u) = int_{R^r} e^{-pi (u-u')ature(u-u')} sign(prod_j m_j . u') d^r u' is the
Gaussian-smoothed sign product attached to a nonsingular frame M; M_r is the
exponentially small complement with prescribed jumps across the walls
w_j . u = 0 of the dual frame. Conventions: M_0 = E_0 = 1, sign(0) = 0.

M_r is evaluated through an exact rewrite of its contour integral. Writing
a = W^T u and eps_j = sign(a_j), each pole factor 1/(w_j . t - i a_j) is an
exponential integral over s_j >= 0; the Gaussian t-integral then collapses and

    M_r(M; u) = (-1)^r pi^-r sign(prod a) |det M|^-1 e^{-pi u.u} * J,
    J = int_{[0,inf)^r} exp(-|a| . s - s^T G s / (4 pi)) ds,
    G = diag(eps) (W^T W) diag(eps).

J has a smooth positive integrand with no poles, uniformly in the wall
distances, so fixed-order tensor Gauss-Legendre on truncated boxes reaches
near machine precision even arbitrarily close to walls. The contour-shifted
tensor Gauss-Hermite rule is kept as eval_M_contour; it is spectrally
accurate only when every |a_j| is order one and serves as a cross-check.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.special import erfcx

from .exceptions import RankTooLarge, WallTooClose
from .quadform import ErrorFunctionFrame, SubsetProjectors, subset_projectors

HARD_RANK_CAP = 6
_CUT = 46.0  # exp(-46) ~ 1e-20 truncation for the orthant boxes


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature policy for direct M_r evaluation.

    nodes_per_axis: tensor rule size per axis (the error estimate reruns at
    half this). scheme 'orthant-gl' is the production path; 'contour-gh'
    selects the contour-shifted Gauss-Hermite rule.
    """

    nodes_per_axis: int = 64
    max_r_direct: int = 4
    scheme: str = "orthant-gl"

    def __post_init__(self):
        if self.nodes_per_axis < 8:
            raise ValueError("nodes_per_axis must be at least 8")
        if self.max_r_direct < 0:
            raise ValueError("max_r_direct must be nonnegative")
        if self.scheme not in ("orthant-gl", "contour-gh"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True, eq=False)
class ErrFnArgument:
    """Frame plus evaluation point, with the wall refusal threshold.

    wall_eps defaults to max(1e-9 |u|, 1e-12). M_r evaluation refuses points
    with any |w_j . u| <= wall_eps; E_r is smooth and never refuses.
    """

    frame: ErrorFunctionFrame
    u: np.ndarray
    wall_eps: float | None = None

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.u, dtype=float))
        object.__setattr__(self, "u", u)
        if u.shape != (self.frame.r,):
            raise ValueError(f"u has shape {u.shape}, frame rank is {self.frame.r}")
        if self.wall_eps is None:
            object.__setattr__(self, "wall_eps", max(1e-9 * float(np.linalg.norm(u)), 1e-12))
        elif self.wall_eps <= 0:
            raise ValueError("wall_eps must be positive")


@dataclass(frozen=True)
class ErrFnValue:
    value: float
    imag_residual: float
    est_error: float


def wall_distances(arg: ErrFnArgument) -> np.ndarray:
    """Signed wall coordinates a_j = w_j . u."""
    return arg.frame.w_mat.T @ arg.u


@lru_cache(maxsize=32)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=32)
def _hermgauss(n: int):
    x, w = np.polynomial.hermite.hermgauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _smax_bounds(G: np.ndarray, b: np.ndarray, cut: float) -> np.ndarray:
    """Per-axis box bounds: outside them the integrand is below e^-cut.

    Along axis j the exponent is at least b_j s + s^2 / (4 pi (G^-1)_jj),
    minimized over the other coordinates.
    """
    d = np.diag(np.linalg.inv(G)).copy()
    d = np.maximum(d, 1e-300)
    q = 1.0 / (4.0 * np.pi * d)
    return (-b + np.sqrt(b * b + 4.0 * q * cut)) / (2.0 * q)


def _log_erfc(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = np.log(erfcx(x[pos])) - x[pos] ** 2
    xn = x[~pos]
    out[~pos] = np.log(2.0 - erfcx(-xn) * np.exp(-(xn ** 2)))
    return out


def _tensor_grid(nodes: list[np.ndarray], weights: list[np.ndarray]):
    grids = np.meshgrid(*nodes, indexing="ij")
    S = np.stack([g.reshape(-1) for g in grids], axis=0)
    wt = weights[0]
    for w in weights[1:]:
        wt = np.multiply.outer(wt, w)
    return S, wt.reshape(-1)


def _orthant_J_full(G: np.ndarray, b: np.ndarray, n: int) -> float:
    smax = _smax_bounds(G, b, _CUT)
    x, w = _leggauss(n)
    nodes = [(x + 1.0) * 0.5 * s for s in smax]
    wts = [w * 0.5 * s for s in smax]
    S, wt = _tensor_grid(nodes, wts)
    expo = b @ S + (0.25 / np.pi) * np.einsum("in,in->n", S, G @ S)
    return float(wt @ np.exp(-expo))


def _orthant_J_reduced(G: np.ndarray, b: np.ndarray, n: int) -> float:
    """Integrate the axis with the strongest linear decay in closed form.

    inner integral: int_0^inf e^{-beta s - gamma s^2/(4 pi)} ds
                  = (pi / sqrt(gamma)) e^{x^2} erfc(x),  x = beta sqrt(pi/gamma).
    beta goes negative where off-diagonal couplings are negative, so the
    e^{x^2} growth is kept in log space and cancelled against the outer
    Gaussian before exponentiating.
    """
    r = len(b)
    k = int(np.argmax(b))
    idx = [j for j in range(r) if j != k]
    Gp = G[np.ix_(idx, idx)]
    g = G[idx, k]
    gamma = G[k, k]
    bp = b[idx]
    smax = _smax_bounds(G, b, _CUT + 2.0)[idx]
    x, w = _leggauss(n)
    nodes = [(x + 1.0) * 0.5 * s for s in smax]
    wts = [w * 0.5 * s for s in smax]
    S, wt = _tensor_grid(nodes, wts)
    beta = b[k] + (g @ S) / (2.0 * np.pi)
    xx = beta * np.sqrt(np.pi / gamma)
    L = (
        -(bp @ S)
        - (0.25 / np.pi) * np.einsum("in,in->n", S, Gp @ S)
        + math.log(np.pi / math.sqrt(gamma))
        + xx ** 2
        + _log_erfc(xx)
    )
    return float(wt @ np.exp(L))


def _orthant_J(G: np.ndarray, b: np.ndarray, n: int) -> float:
    r = len(b)
    if r == 1:
        gamma = G[0, 0]
        xx = b[0] * math.sqrt(np.pi / gamma)
        return float(np.pi / math.sqrt(gamma) * erfcx(xx))
    if r <= 3:
        return _orthant_J_full(G, b, n)
    return _orthant_J_reduced(G, b, n)


def _check_rank(r: int, quad: QuadratureSpec):
    cap = min(quad.max_r_direct, HARD_RANK_CAP)
    if r > cap:
        raise RankTooLarge(f"rank {r} exceeds direct evaluation cap {cap}")


def _check_walls(a: np.ndarray, wall_eps: float):
    dist = np.abs(a)
    j = int(np.argmin(dist)) if len(dist) else 0
    if len(dist) and dist[j] <= wall_eps:
        raise WallTooClose(
            f"wall coordinate w_{j} . u = {a[j]:.3e} is within {wall_eps:.3e} of zero",
            j=j,
            distance=float(dist[j]),
        )


def _m_raw(m_mat: np.ndarray, u: np.ndarray, wall_eps: float, n: int) -> tuple[float, float]:
    """(value, est_error) of M_r via the orthant representation."""
    r = m_mat.shape[0]
    if r == 0:
        return 1.0, 0.0
    w_mat = np.linalg.inv(m_mat).T
    a = w_mat.T @ u
    _check_walls(a, wall_eps)
    eps = np.sign(a)
    G = np.outer(eps, eps) * (w_mat.T @ w_mat)
    b = np.abs(a)
    pref = (
        (-1.0) ** r
        * np.pi ** (-r)
        * float(np.prod(eps))
        / abs(float(np.linalg.det(m_mat)))
        * math.exp(-np.pi * float(u @ u))
    )
    v1 = _orthant_J(G, b, n)
    if r == 1:
        value = pref * v1
        return value, abs(value) * 1e-15 + 1e-18
    v2 = _orthant_J(G, b, max(n // 2, 8))
    value = pref * v1
    est = abs(pref) * abs(v1 - v2) + abs(value) * 1e-15 + 1e-18
    return value, est


def eval_M(arg: ErrFnArgument, quad: QuadratureSpec = DEFAULT_QUAD) -> ErrFnValue:
    """M_r at a point off every wall.

    Raises WallTooClose when min_j |w_j . u| <= wall_eps and RankTooLarge
    past the direct cap. The orthant path is purely real, so imag_residual
    is 0; est_error compares full and half node counts.
    """
    r = arg.frame.r
    _check_rank(r, quad)
    if quad.scheme == "contour-gh":
        return eval_M_contour(arg, quad)
    value, est = _m_raw(arg.frame.m_mat, arg.u, arg.wall_eps, quad.nodes_per_axis)
    return ErrFnValue(value=value, imag_residual=0.0, est_error=est)


def _contour_sum(m_mat, w_mat, a, u, n) -> complex:
    r = m_mat.shape[0]
    x, w = _hermgauss(n)
    t_nodes = x / math.sqrt(np.pi)
    total = 0.0 + 0.0j
    # block over the first axis to bound memory at higher rank
    if r == 1:
        den = w_mat[0, 0] * t_nodes - 1j * a[0]
        total = np.sum(w / den)
    else:
        sub_nodes = [t_nodes] * (r - 1)
        sub_w = [w] * (r - 1)
        T, wt = _tensor_grid(sub_nodes, sub_w)
        for i0 in range(n):
            den = np.ones(T.shape[1], dtype=complex)
            for j in range(r):
                lin = w_mat[0, j] * t_nodes[i0] + w_mat[1:, j] @ T
                den *= lin - 1j * a[j]
            total += w[i0] * np.sum(wt / den)
    pref = (1j / np.pi) ** r / abs(np.linalg.det(m_mat)) * math.exp(-np.pi * float(u @ u))
    return pref * total * np.pi ** (-r / 2)


def eval_M_contour(arg: ErrFnArgument, quad: QuadratureSpec = DEFAULT_QUAD) -> ErrFnValue:
    """Contour-shifted tensor Gauss-Hermite evaluation of M_r.

    Integrand e^{-pi t.t} / prod_j (w_j . t - i a_j) on the real slice; the
    rule converges spectrally only when the poles stay order one away from
    the contour, i.e. all |a_j| ~ 1. Kept as an independent cross-check.
    """
    r = arg.frame.r
    _check_rank(r, quad)
    if r == 0:
        return ErrFnValue(1.0, 0.0, 0.0)
    a = wall_distances(arg)
    _check_walls(a, arg.wall_eps)
    n = quad.nodes_per_axis
    v1 = _contour_sum(arg.frame.m_mat, arg.frame.w_mat, a, arg.u, n)
    v2 = _contour_sum(arg.frame.m_mat, arg.frame.w_mat, a, arg.u, max(n // 2, 8))
    est = abs(v1.real - v2.real) + abs(v1.real) * 1e-15 + 1e-18
    return ErrFnValue(value=float(v1.real), imag_residual=float(v1.imag), est_error=est)


def _subsets(r: int):
    for k in range(r + 1):
        yield from combinations(range(r), k)


def _reduced_m_arg(frame: ErrorFunctionFrame, u: np.ndarray, S: tuple[int, ...],
                   proj: SubsetProjectors) -> tuple[np.ndarray, np.ndarray]:
    """(Q_S M_S, Q_S u): the rank-|S| frame and point of a subset term."""
    sub = frame.m_mat[:, list(S)]
    return proj.Q @ sub, proj.Q @ u


def _e_decomposition_data(arg: ErrFnArgument):
    """Sign arguments and reduced M data for every subset term of E_r.

    Returns a list of (S, sign_args, m_sub, u_sub, sub_wall_coords).
    """
    frame, u = arg.frame, arg.u
    r = frame.r
    out = []
    for S in _subsets(r):
        comp = tuple(j for j in range(r) if j not in S)
        projS = subset_projectors(frame, S)
        signs = []
        if comp:
            projC = subset_projectors(frame, comp)
            Pu = projC.P @ u
            for j in comp:
                signs.append(float((projC.P @ frame.m(j)) @ Pu))
        m_sub, u_sub = _reduced_m_arg(frame, u, S, projS)
        # rows of inv(m_sub) are the dual coordinates w_i . (Q_S u)
        a_sub = np.linalg.inv(m_sub) @ u_sub if len(S) else np.zeros(0)
        out.append((S, np.array(signs), m_sub, u_sub, a_sub))
    return out


def eval_E(arg: ErrFnArgument, quad: QuadratureSpec = DEFAULT_QUAD,
           mc_fallback_samples: int = 4_000_000) -> ErrFnValue:
    """E_r via the subset decomposition into M terms.

    E_r = sum_S sign(prod_{j not in S} m_j . P^T P u) M_|S|(Q_S M_S; Q_S u),
    P = P over the complement of S. E_r is smooth everywhere, so when the
    point sits too close to any sign locus or reduced wall for the M terms
    to be trustworthy, evaluation reroutes to the Monte Carlo convolution
    with a content-derived deterministic seed (est_error is then the
    standard error).
    """
    r = arg.frame.r
    _check_rank(r, quad)
    if r == 0:
        return ErrFnValue(1.0, 0.0, 0.0)
    data = _e_decomposition_data(arg)
    near_wall = False
    for S, signs, m_sub, u_sub, a_sub in data:
        if len(signs) and np.min(np.abs(signs)) <= arg.wall_eps:
            near_wall = True
            break
        if len(S) and np.min(np.abs(a_sub)) <= arg.wall_eps:
            near_wall = True
            break
    if near_wall:
        seed = zlib.crc32(arg.u.tobytes() + arg.frame.m_mat.tobytes()) & 0xFFFFFFFF
        return eval_E_oracle_mc(arg, n_samples=mc_fallback_samples, seed=seed)
    total = 0.0
    est = 0.0
    n = quad.nodes_per_axis
    for S, signs, m_sub, u_sub, a_sub in data:
        coeff = float(np.prod(np.sign(signs))) if len(signs) else 1.0
        if coeff == 0.0:
            continue
        v, e = _m_raw(m_sub, u_sub, min(arg.wall_eps, 1e-12), n) if len(S) else (1.0, 0.0)
        total += coeff * v
        est += e
    return ErrFnValue(value=total, imag_residual=0.0, est_error=est + abs(total) * 1e-15)


def eval_E_oracle_mc(arg: ErrFnArgument, n_samples: int, seed: int) -> ErrFnValue:
    """Monte Carlo convolution oracle for E_r.

    Draws u' ~ N(u, I/(2 pi)) and averages the sign product; est_error is
    the standard error of the mean. Independent of all quadrature code.
    """
    if n_samples < 10_000:
        raise ValueError("n_samples must be at least 10000")
    rng = np.random.default_rng(seed)
    r = arg.frame.r
    sigma = 1.0 / math.sqrt(2.0 * np.pi)
    chunk = 1_000_000
    tot = 0.0
    tot2 = 0.0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        up = arg.u + sigma * rng.standard_normal((m, r))
        s = np.prod(np.sign(up @ arg.frame.m_mat), axis=1)
        tot += float(np.sum(s))
        tot2 += float(np.sum(s * s))
        done += m
    mean = tot / n_samples
    var = max(tot2 / n_samples - mean * mean, 0.0) * n_samples / max(n_samples - 1, 1)
    stderr = math.sqrt(var / n_samples)
    return ErrFnValue(value=mean, imag_residual=0.0, est_error=stderr)


def _axis_factor(frame: ErrorFunctionFrame, u: np.ndarray, j: int) -> tuple[float, float]:
    """(m_j . u / |m_j|, gaussian factor e^{-pi (m_j.u)^2/|m_j|^2})."""
    mj = frame.m(j)
    nrm = float(np.linalg.norm(mj))
    t = float(mj @ u) / nrm
    return t, math.exp(-np.pi * t * t)


def _complement_reduction(frame: ErrorFunctionFrame, u: np.ndarray, j: int):
    """Rank r-1 data (P M with column j dropped, P u) for the derivative and
    shadow formulas."""
    others = tuple(k for k in range(frame.r) if k != j)
    proj = subset_projectors(frame, others)
    m_red = proj.P @ frame.m_mat[:, list(others)]
    return m_red, proj.P @ u


def _f_reduced(kind: str, m_red: np.ndarray, u_red: np.ndarray, wall_eps: float,
               quad: QuadratureSpec) -> tuple[float, float]:
    if m_red.shape[0] == 0:
        return 1.0, 0.0
    sub = ErrFnArgument(frame=ErrorFunctionFrame.from_m(m_red), u=u_red, wall_eps=wall_eps)
    res = eval_M(sub, quad) if kind == "M" else eval_E(sub, quad)
    return res.value, res.est_error


def derivative_M(arg: ErrFnArgument, j: int, quad: QuadratureSpec = DEFAULT_QUAD) -> ErrFnValue:
    """Directional derivative w_j . grad M_r, reduced to a rank r-1 value:

    w_j . grad M_r = (2/|m_j|) e^{-pi (m_j.u)^2/|m_j|^2} M_{r-1}(P M; P u).
    """
    return _derivative(arg, j, "M", quad)


def derivative_E(arg: ErrFnArgument, j: int, quad: QuadratureSpec = DEFAULT_QUAD) -> ErrFnValue:
    """w_j . grad E_r, same reduction with E in place of M."""
    return _derivative(arg, j, "E", quad)


def _derivative(arg: ErrFnArgument, j: int, kind: str, quad: QuadratureSpec) -> ErrFnValue:
    frame = arg.frame
    if not (0 <= j < frame.r):
        raise ValueError(f"axis {j} out of range")
    _, gauss = _axis_factor(frame, arg.u, j)
    nrm = float(np.linalg.norm(frame.m(j)))
    m_red, u_red = _complement_reduction(frame, arg.u, j)
    v, e = _f_reduced(kind, m_red, u_red, arg.wall_eps, quad)
    scale = 2.0 / nrm * gauss
    return ErrFnValue(value=scale * v, imag_residual=0.0, est_error=abs(scale) * e)


def shadow(arg: ErrFnArgument, kind: str = "E", quad: QuadratureSpec = DEFAULT_QUAD) -> ErrFnValue:
    """Radial derivative bracket of F_r in {M_r, E_r}:

        sum_j (m_j . u / |m_j|) e^{-pi (m_j.u)^2 / |m_j|^2} F_{r-1}(P M; P u).

    u . grad F_r equals exactly 2x this value; the modular completion story
    attaches a further i/2 which is stripped here to keep the result real.
    """
    if kind not in ("M", "E"):
        raise ValueError("kind must be 'M' or 'E'")
    frame = arg.frame
    total = 0.0
    est = 0.0
    for j in range(frame.r):
        t, gauss = _axis_factor(frame, arg.u, j)
        m_red, u_red = _complement_reduction(frame, arg.u, j)
        v, e = _f_reduced(kind, m_red, u_red, arg.wall_eps, quad)
        total += t * gauss * v
        est += abs(t * gauss) * e
    return ErrFnValue(value=total, imag_residual=0.0, est_error=est)


def discontinuity_limit(arg: ErrFnArgument, S, approach_signs: dict[int, int],
                        quad: QuadratureSpec = DEFAULT_QUAD) -> ErrFnValue:
    """One-sided limit of M_r on the wall stratum w_j . u = 0 for j outside S:

        lim M_r = (-1)^(r-|S|) sign(W_comp^T u) M_|S|(Q_S M_S; Q_S u)

    with the vanishing signs replaced by the caller's approach side.
    """
    frame = arg.frame
    r = frame.r
    S = tuple(sorted(set(int(j) for j in S)))
    comp = tuple(j for j in range(r) if j not in S)
    if not comp:
        raise ValueError("S must be a proper subset")
    if set(approach_signs) != set(comp):
        raise ValueError(f"approach_signs must cover exactly {comp}")
    if any(s not in (-1, 1) for s in approach_signs.values()):
        raise ValueError("approach signs must be +-1")
    a = wall_distances(arg)
    scale = max(float(np.linalg.norm(arg.u)), 1.0)
    for j in comp:
        if abs(a[j]) > 1e-7 * scale:
            raise ValueError(f"u is not on the wall stratum: |w_{j} . u| = {abs(a[j]):.3e}")
    proj = subset_projectors(frame, S)
    m_sub, u_sub = _reduced_m_arg(frame, arg.u, S, proj)
    v, e = _f_reduced("M", m_sub, u_sub, min(arg.wall_eps, 1e-12), quad)
    coeff = (-1.0) ** (r - len(S)) * float(np.prod([approach_signs[j] for j in comp]))
    return ErrFnValue(value=coeff * v, imag_residual=0.0, est_error=e)


def bound_check(arg: ErrFnArgument, quad: QuadratureSpec = DEFAULT_QUAD,
                rhs_scale: float = 1.0):
    """Checks |M_r| <= r! e^{-pi u.u} (+ est_error slack).

    rhs_scale deliberately miscalibrates the bound for mutation sanity tests.
    Returns (lhs, rhs, ok, est_error).
    """
    res = eval_M(arg, quad)
    r = arg.frame.r
    rhs = rhs_scale * math.factorial(r) * math.exp(-np.pi * float(arg.u @ arg.u))
    lhs = abs(res.value)
    return lhs, rhs, lhs <= rhs + res.est_error, res.est_error


def vigneras_residual(arg: ErrFnArgument, kind: str = "E", h: float = 1e-3,
                      quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Central finite difference residual of sum_j (d^2/du_j^2 + 2 pi u_j d/du_j).

    Both E_r and M_r are annihilated exactly, so the residual is pure
    truncation, O(h^2), plus quadrature noise / h^2.
    """
    if kind not in ("M", "E"):
        raise ValueError("kind must be 'M' or 'E'")

    def f(u):
        sub = ErrFnArgument(frame=arg.frame, u=u, wall_eps=arg.wall_eps)
        return (eval_M(sub, quad) if kind == "M" else eval_E(sub, quad)).value

    u0 = arg.u
    f0 = f(u0)
    total = 0.0
    for j in range(arg.frame.r):
        e = np.zeros_like(u0)
        e[j] = h
        fp = f(u0 + e)
        fm = f(u0 - e)
        total += (fp - 2.0 * f0 + fm) / h ** 2
        total += 2.0 * np.pi * u0[j] * (fp - fm) / (2.0 * h)
    return total


def decompose_M_into_E(arg: ErrFnArgument, quad: QuadratureSpec = DEFAULT_QUAD):
    """Wall-crossing expansion M_r = sum_S (-1)^(r-|S|) sign(W_comp^T u) E_|S|.

    Returns (terms, total): terms are dicts with the subset, the +-1
    coefficient, and the E value of the reduced argument. The sum telescopes
    the discontinuities of the sign coefficients against the smooth E terms.
    """
    frame, u = arg.frame, arg.u
    r = frame.r
    a = wall_distances(arg)
    _check_walls(a, arg.wall_eps)
    terms = []
    total = 0.0
    est = 0.0
    for S in _subsets(r):
        comp = tuple(j for j in range(r) if j not in S)
        coeff = (-1.0) ** (r - len(S)) * float(np.prod(np.sign(a[list(comp)]))) if comp \
            else 1.0
        proj = subset_projectors(frame, S)
        m_sub, u_sub = _reduced_m_arg(frame, u, S, proj)
        if len(S):
            sub = ErrFnArgument(frame=ErrorFunctionFrame.from_m(m_sub), u=u_sub,
                                wall_eps=arg.wall_eps)
            ev = eval_E(sub, quad)
            val, e = ev.value, ev.est_error
        else:
            val, e = 1.0, 0.0
        terms.append({"S": S, "coeff": coeff, "value": val, "est_error": e})
        total += coeff * val
        est += e
    return terms, ErrFnValue(value=total, imag_residual=0.0, est_error=est)
