import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lcsym.kernel import KernelCoeffs
from lcsym.so3 import random_rotations
from lcsym.state import MomentState
from lcsym.symmetry import (
    analyze,
    c_min,
    commutator_norm,
    detect_phase,
    lemma_condition_check,
    p_alignment,
    shared_eigenframe,
    theorem1_applies,
)

from oracles import cmin_by_bisection

I3 = np.eye(3) / 3


def _rot_e3(t):
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])


def _noncommuting_pair():
    R = _rot_e3(0.1)
    return np.diag([0.6, 0.3, 0.1]), R @ np.diag([0.5, 0.3, 0.2]) @ R.T


def _state(Q1, Q2, p=(0, 0, 0)):
    return MomentState(np.asarray(p, float), Q1, Q2)


def _random_trace_one_psd(rng):
    A = rng.standard_normal((3, 3))
    M = A @ A.T
    return M / np.trace(M)


# commutator


def test_commutator_trivial():
    assert commutator_norm(I3, I3) == 0.0
    assert commutator_norm(np.diag([0.5, 0.3, 0.2]), np.diag([0.1, 0.1, 0.8])) == 0.0


def test_commutator_against_hand_arithmetic():
    Q1, Q2 = _noncommuting_pair()
    # explicit entries of Q1 Q2 - Q2 Q1 for a diagonal Q1: (a_i - a_j) Q2_ij
    a = [0.6, 0.3, 0.1]
    total = 0.0
    for i in range(3):
        for j in range(3):
            total += ((a[i] - a[j]) * Q2[i][j]) ** 2
    assert commutator_norm(Q1, Q2) == pytest.approx(math.sqrt(total), rel=1e-14)
    assert commutator_norm(Q1, Q2) > 1e-3


# shared frame


def _check_frame(R, Q1, Q2, tol):
    assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-12)
    for Q in (Q1, Q2):
        D = R @ Q @ R.T
        assert np.max(np.abs(D - np.diag(np.diag(D)))) <= tol


def test_frame_of_commuting_diagonal_pair():
    Q1, Q2 = np.diag([0.6, 0.3, 0.1]), np.diag([0.5, 0.3, 0.2])
    R = shared_eigenframe(Q1, Q2)
    assert R is not None
    # identity up to a signed permutation
    np.testing.assert_allclose(np.abs(R) @ np.ones(3), np.ones(3), atol=1e-12)
    _check_frame(R, Q1, Q2, 1e-12)


def test_frame_for_degenerate_q1_is_q2_eigenframe():
    rng = np.random.default_rng(0)
    Q2 = _random_trace_one_psd(rng)
    R = shared_eigenframe(I3, Q2)
    assert R is not None
    _check_frame(R, I3, Q2, 1e-12)
    _, V = np.linalg.eigh(Q2)
    np.testing.assert_allclose(np.abs(R @ V), np.eye(3)[np.argsort(np.diag(R @ Q2 @ R.T))], atol=1e-10)


def test_frame_absent_for_noncommuting_pair():
    assert shared_eigenframe(*_noncommuting_pair(), tol=1e-10) is None


def test_frame_uniaxial_q1_biaxial_q2():
    rng = np.random.default_rng(1)
    R0 = random_rotations(rng)
    Q1 = R0.T @ np.diag([0.2, 0.2, 0.6]) @ R0
    Q2 = R0.T @ np.diag([0.5, 0.1, 0.4]) @ R0
    R = shared_eigenframe(Q1, Q2)
    assert R is not None
    _check_frame(R, Q1, Q2, 1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_random_pairs_do_not_commute_and_have_no_frame(seed):
    rng = np.random.default_rng(seed)
    Q1, Q2 = _random_trace_one_psd(rng), _random_trace_one_psd(rng)
    assume(commutator_norm(Q1, Q2) > 1e-6)
    assert shared_eigenframe(Q1, Q2, tol=1e-10) is None


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(0, 3))
def test_commuting_pairs_have_frame(seed, degeneracy):
    rng = np.random.default_rng(seed)
    R0 = random_rotations(rng)
    a, b = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
    if degeneracy & 1:
        a[1] = a[0]
    if degeneracy & 2:
        b[2] = b[1]
    Q1, Q2 = R0.T @ np.diag(a) @ R0, R0.T @ np.diag(b) @ R0
    assert commutator_norm(Q1, Q2) <= 1e-14
    R = shared_eigenframe(Q1, Q2, tol=1e-10)
    assert R is not None
    _check_frame(R, Q1, Q2, 1e-10)


# phase labels and p alignment


@pytest.mark.parametrize(
    "Q1,Q2,p,label",
    [
        (I3, I3, (0, 0, 0), "isotropic"),
        (np.diag([0.6, 0.2, 0.2]), np.diag([0.2, 0.4, 0.4]), (0, 0, 0), "uniaxial"),
        (np.diag([0.6, 0.3, 0.1]), np.diag([0.2, 0.4, 0.4]), (0, 0, 0), "biaxial"),
        (np.diag([0.6, 0.2, 0.2]), np.diag([0.2, 0.4, 0.4]), (0.3, 0, 0), "polar-uniaxial"),
        (np.diag([0.6, 0.3, 0.1]), np.diag([0.2, 0.4, 0.4]), (0.3, 0, 0), "polar-biaxial"),
        (I3, I3, (0.3, 0, 0), "unclassified"),
        (*_noncommuting_pair(), (0, 0, 0), "unclassified"),
    ],
)
def test_detect_phase(Q1, Q2, p, label):
    assert detect_phase(_state(Q1, Q2, p)) == label


def test_p_alignment():
    Q1 = np.diag([0.6, 0.2, 0.2])
    assert p_alignment(_state(Q1, I3))
    assert p_alignment(_state(Q1, I3, (1, 0, 0)))
    assert not p_alignment(_state(Q1, I3, (1 / math.sqrt(2), 1 / math.sqrt(2), 0)))


def test_analyze_fields():
    rep = analyze(_state(np.diag([0.6, 0.3, 0.1]), np.diag([0.2, 0.5, 0.3])))
    assert rep.commutator_norm == 0.0 and rep.shared_frame is not None and rep.p_aligned
    assert rep.eigvals_Q1 == pytest.approx((0.1, 0.3, 0.6))
    assert rep.phase_label == "biaxial"


# theorem applicability


def test_theorem_not_negative_definite():
    v = theorem1_applies(KernelCoeffs(0, -1, -1, -2))
    assert v.applies and v.branch == "not-negative-definite" and v.c1_ok


def test_theorem_swap_branch():
    v = theorem1_applies(KernelCoeffs(0, -3, -1, 0))
    assert v.epsilon == 3.0 and v.epsilon_swapped == 1.0
    assert v.applies and v.branch == "epsilon-bound-swapped"


def test_theorem_c1_too_small():
    v = theorem1_applies(KernelCoeffs(-2, -1, -1, 0))
    assert not v.c1_ok and not v.applies


def test_theorem_none_branch():
    v = theorem1_applies(KernelCoeffs(0, -10, -10, 1))
    assert v.branch == "none" and not v.applies


def test_theorem_epsilon_branch():
    v = theorem1_applies(KernelCoeffs(0, -1.5, -4, 0.5))
    assert v.branch == "epsilon-bound" and v.epsilon == pytest.approx(0.25 / -4 + 1.5)


coef = st.floats(-20, 20, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(coef, coef, coef, coef)
def test_theorem_swap_invariance(c1, c2, c3, c4):
    a = theorem1_applies(KernelCoeffs(c1, c2, c3, c4))
    b = theorem1_applies(KernelCoeffs(c1, c3, c2, c4))
    assert a.applies == b.applies
    if a.applies:
        assert a.c1_ok and a.branch != "none"


# c_min


def test_c_min_examples():
    assert c_min(-1, -2, 0) == 2.0
    assert c_min(-2, -2, -1) == pytest.approx(4 / 3, rel=1e-15)
    assert c_min(-1, -1, -2) == math.inf
    assert c_min(-1, -1, 1) == math.inf


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, -0.1), st.floats(-5, -0.1), st.floats(-3, 3), st.floats(0.01, 100))
def test_c_min_homogeneous(c2, c3, c4, s):
    assume(c2 * c3 - c4**2 > 1e-3)
    assert c_min(s * c2, s * c3, s * c4) == pytest.approx(c_min(c2, c3, c4) / s, rel=1e-12)


def test_c_min_matches_bisection():
    rng = np.random.default_rng(3)
    n = 0
    while n < 30:
        c2, c3 = -rng.uniform(0.1, 5, 2)
        c4 = rng.uniform(-3, 3)
        if c2 * c3 - c4**2 <= 1e-3:
            continue
        assert c_min(c2, c3, c4) == pytest.approx(cmin_by_bisection(c2, c3, c4), rel=1e-9)
        n += 1


# lemma conditions


@pytest.mark.parametrize("tag", ["D_inf_h", "C_inf_v", "D_2h", "C_2v"])
def test_lemma_isotropic(tag):
    assert lemma_condition_check(MomentState.isotropic(), tag)


def test_lemma_commuting_and_noncommuting():
    assert lemma_condition_check(_state(np.diag([0.6, 0.3, 0.1]), np.diag([0.2, 0.5, 0.3])), "D_2h")
    assert not lemma_condition_check(_state(*_noncommuting_pair()), "D_2h")


def test_lemma_axial_conditions():
    uni = np.diag([0.6, 0.2, 0.2])
    assert lemma_condition_check(_state(uni, I3), "D_inf_h")
    assert not lemma_condition_check(_state(np.diag([0.6, 0.3, 0.1]), I3), "D_inf_h")
    assert lemma_condition_check(_state(uni, I3, (0.4, 0, 0)), "C_inf_v")
    assert not lemma_condition_check(_state(uni, I3, (0, 0.4, 0)), "C_inf_v")


def test_lemma_c2v_needs_aligned_p():
    Q1, Q2 = np.diag([0.6, 0.3, 0.1]), np.diag([0.2, 0.5, 0.3])
    assert lemma_condition_check(_state(Q1, Q2, (0, 0.2, 0)), "C_2v")
    assert not lemma_condition_check(_state(Q1, Q2, (0.2, 0.2, 0)), "C_2v")


def test_lemma_unknown_tag():
    with pytest.raises(ValueError):
        lemma_condition_check(MomentState.isotropic(), "O_h")
