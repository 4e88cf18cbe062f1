"""Error functions E_r and M_r: closed forms, dual quadrature routes,
derivative/shadow/PDE identities, bound, discontinuity structure."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf, erfc

from thetaforge.errfn import (ErrFnArgument, QuadratureSpec, bound_check,
                              decompose_M_into_E, derivative_E, derivative_M,
                              discontinuity_limit, eval_E, eval_E_oracle_mc,
                              eval_M, eval_M_contour, shadow, vigneras_residual,
                              wall_distances)
from thetaforge.exceptions import RankTooLarge, WallTooClose
from thetaforge.quadform import ErrorFunctionFrame

SQPI = math.sqrt(math.pi)


def arg(m, u, **kw):
    return ErrFnArgument(frame=ErrorFunctionFrame.from_m(np.asarray(m, dtype=float)),
                         u=np.asarray(u, dtype=float), **kw)


def m1_ref(u: float) -> float:
    return -math.copysign(1.0, u) * erfc(SQPI * abs(u))


def e1_ref(u: float) -> float:
    return erf(SQPI * u)


def test_rank_zero_is_one():
    frame = ErrorFunctionFrame.from_m(np.zeros((0, 0)))
    a = ErrFnArgument(frame=frame, u=np.zeros(0))
    assert eval_M(a).value == 1.0
    assert eval_E(a).value == 1.0


@pytest.mark.parametrize("u0", [0.3, -0.7, 1.5, 0.001, -2.0, 3.0])
def test_r1_closed_forms(u0):
    a = arg([[1.0]], [u0])
    assert eval_M(a).value == pytest.approx(m1_ref(u0), abs=1e-12)
    assert eval_E(a).value == pytest.approx(e1_ref(u0), abs=1e-12)


def test_r1_scaling_depends_on_sign_only():
    # M_1((m); u) = -sign(m) sign(u) erfc(sqrt(pi)|u|): |m| drops out
    for m, u0 in [(3.0, 0.8), (-0.5, 0.8), (7.0, -0.4)]:
        a = arg([[m]], [u0])
        ref = -math.copysign(1.0, m) * math.copysign(1.0, u0) * erfc(SQPI * abs(u0))
        assert eval_M(a).value == pytest.approx(ref, abs=1e-12)
        assert eval_E(a).value == pytest.approx(math.copysign(1.0, m) * erf(SQPI * u0),
                                                abs=1e-12)


def test_diagonal_frames_factorize():
    # diagonal entries contribute only their sign (r=1 scaling law per axis)
    diag = [1.0, 1.3, -0.7, 2.0]
    u = [0.5, 0.4, -0.6, 0.9]
    for r in (2, 3, 4):
        a = arg(np.diag(diag[:r]), u[:r])
        refM = math.prod(math.copysign(1.0, diag[j]) * m1_ref(u[j]) for j in range(r))
        v = eval_M(a)
        assert v.value == pytest.approx(refM, abs=1e-10)
        refE = math.prod(math.copysign(1.0, diag[j]) * e1_ref(u[j]) for j in range(r))
        assert eval_E(a).value == pytest.approx(refE, abs=1e-10)


def test_orthant_and_contour_routes_agree():
    a = arg([[1.0, 0.3], [0.2, 1.1]], [0.8, 0.6])
    v_orth = eval_M(a)
    v_gh = eval_M_contour(a, QuadratureSpec(nodes_per_axis=160, scheme="contour-gh"))
    assert v_orth.value == pytest.approx(v_gh.value, abs=1e-10)
    assert abs(v_gh.imag_residual) < 1e-10


def test_near_wall_stability_r2():
    for d in (1e-1, 1e-2, 1e-3):
        u = np.array([d, 0.7])
        v = eval_M(arg(np.eye(2), u))
        ref = m1_ref(d) * m1_ref(0.7)
        assert v.value == pytest.approx(ref, abs=1e-11)


def test_wall_refusal_and_distances():
    a = arg(np.eye(2), [1e-13, 0.5])
    assert wall_distances(a)[0] == pytest.approx(1e-13)
    with pytest.raises(WallTooClose):
        eval_M(a)
    # E is smooth across walls: it reroutes instead of refusing
    v = eval_E(a)
    assert abs(v.value) < 1e-2


def test_rank_cap():
    with pytest.raises(RankTooLarge):
        eval_M(arg(np.eye(7), np.full(7, 0.5)),
               QuadratureSpec(nodes_per_axis=16, max_r_direct=4))


def test_mc_oracle_matches_product_form():
    a = arg(np.eye(2), [0.3, 0.5])
    mc = eval_E_oracle_mc(a, n_samples=400_000, seed=42)
    ref = e1_ref(0.3) * e1_ref(0.5)
    assert abs(mc.value - ref) < 4 * mc.est_error


def test_e_decomposition_path_matches_mc():
    m = np.array([[1.0, 0.4], [-0.3, 0.9]])
    u = np.array([0.45, -0.65])
    a = arg(m, u)
    direct = eval_E(a)
    mc = eval_E_oracle_mc(a, n_samples=1_000_000, seed=11)
    assert abs(direct.value - mc.value) < 4 * mc.est_error


def test_derivative_matches_finite_difference():
    m = np.array([[1.0, 0.3], [0.2, 1.1]])
    frame = ErrorFunctionFrame.from_m(m)
    u = np.array([0.8, 0.6])
    h = 1e-5
    for kind, ev, der in (("M", eval_M, derivative_M), ("E", eval_E, derivative_E)):
        grad = np.array([
            (ev(ErrFnArgument(frame=frame, u=u + h * np.eye(2)[k])).value
             - ev(ErrFnArgument(frame=frame, u=u - h * np.eye(2)[k])).value) / (2 * h)
            for k in range(2)])
        for j in range(2):
            formula = der(ErrFnArgument(frame=frame, u=u), j).value
            assert formula == pytest.approx(frame.w(j) @ grad, abs=5e-9), (kind, j)


def test_shadow_is_half_euler_derivative():
    m = np.array([[1.0, 0.3], [0.2, 1.1]])
    frame = ErrorFunctionFrame.from_m(m)
    u = np.array([0.8, 0.6])
    h = 1e-5
    for kind, ev in (("E", eval_E), ("M", eval_M)):
        grad = np.array([
            (ev(ErrFnArgument(frame=frame, u=u + h * np.eye(2)[k])).value
             - ev(ErrFnArgument(frame=frame, u=u - h * np.eye(2)[k])).value) / (2 * h)
            for k in range(2)])
        sv = shadow(ErrFnArgument(frame=frame, u=u), kind=kind).value
        assert sv == pytest.approx((u @ grad) / 2, abs=5e-9), kind


def test_vigneras_residual_is_second_order():
    a = arg([[1.0, 0.3], [0.2, 1.1]], [0.8, 0.6])
    for kind in ("M", "E"):
        r1 = abs(vigneras_residual(a, kind=kind, h=1e-3))
        r2 = abs(vigneras_residual(a, kind=kind, h=5e-4))
        assert r2 <= r1 / 3.5, (kind, r1, r2)


def test_bound_and_tamper():
    a = arg([[1.0, 0.3], [0.2, 1.1]], [0.8, 0.6])
    lhs, rhs, ok, est = bound_check(a)
    assert ok and lhs <= rhs + est
    _, _, tampered_ok, _ = bound_check(a, rhs_scale=1e-3)
    assert not tampered_ok


def test_m_decomposes_into_e_terms():
    a = arg([[1.0, 0.3], [0.2, 1.1]], [0.8, 0.6])
    terms, total = decompose_M_into_E(a)
    assert len(terms) == 4
    assert total.value == pytest.approx(eval_M(a).value, abs=1e-10)


def test_m_decomposition_r3():
    a = arg([[1.0, 0.3, 0.1], [0.2, 1.1, -0.4], [0.0, 0.5, 0.9]],
            [0.8, 0.6, -0.7])
    _, total = decompose_M_into_E(a)
    assert total.value == pytest.approx(eval_M(a).value, abs=1e-8)


def test_discontinuity_limits_two_sided():
    """One-sided limits at a wall match the on-wall formula.

    The wall point is taken at norm 2.2 so the continuous remainder of the
    jump formula sits well below the comparison tolerance."""
    frame = ErrorFunctionFrame.from_m(np.array([[1.0, 0.3], [0.2, 1.1]]))
    w1 = frame.w(1)
    uwall = np.array([w1[1], -w1[0]])
    uwall *= 2.2 / np.linalg.norm(uwall)
    if abs(frame.w(0) @ uwall) < 0.3:
        uwall = -uwall
    for s in (+1, -1):
        lim = discontinuity_limit(ErrFnArgument(frame=frame, u=uwall),
                                  S=(0,), approach_signs={1: s}).value
        uu = uwall + s * 1e-6 * w1
        v = eval_M(ErrFnArgument(frame=frame, u=uu, wall_eps=1e-9)).value
        assert v == pytest.approx(lim, abs=1e-6)


def test_sign_flip_parity():
    # flipping u negates every sign argument: F_r(-u) = (-1)^r F_r(u)
    a = arg([[1.0, 0.3], [0.2, 1.1]], [0.8, 0.6])
    b = arg([[1.0, 0.3], [0.2, 1.1]], [-0.8, -0.6])
    assert eval_M(b).value == pytest.approx(eval_M(a).value, abs=1e-12)
    assert eval_E(b).value == pytest.approx(eval_E(a).value, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-2.5, max_value=2.5),
       st.floats(min_value=-2.5, max_value=2.5))
def test_e_is_bounded_by_one(u1, u2):
    u = np.array([u1, u2])
    if min(abs(u1), abs(u2)) < 1e-3:
        return
    v = eval_E(arg(np.eye(2), u))
    assert abs(v.value) <= 1.0 + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.05, max_value=2.0),
       st.floats(min_value=0.05, max_value=2.0))
def test_m_bound_property(u1, u2):
    u = np.array([u1, u2])
    v = eval_M(arg(np.eye(2), u))
    assert abs(v.value) <= 2.0 * math.exp(-math.pi * float(u @ u)) + v.est_error + 1e-15
