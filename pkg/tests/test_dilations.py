import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geomruzsa.delta_core import Sampled, check_axiom1, check_axiom2
from geomruzsa.dilations import (
    DomainError,
    EuclideanSpace,
    HeisenbergSpace,
    approx_axiom1_coordinate_error,
    approx_difference,
    as_points,
    check_approx_axiom1,
    convergence_table,
    heis_dilation,
    heis_mul,
    limit_difference,
    limit_structure,
    loglog_slope,
    parse_space,
)

E2 = EuclideanSpace(2)
H = HeisenbergSpace()
O2 = np.zeros(2)
I3 = np.zeros(3)


# -- independent Heisenberg oracle: unitriangular matrices -----------------------

def to_matrix(p):
    x, y, z = p
    return np.array([[1.0, x, z + x * y / 2], [0, 1, y], [0, 0, 1]])


def from_matrix(m):
    x, y, c = m[0, 1], m[1, 2], m[0, 2]
    return np.array([x, y, c - x * y / 2])


def mat_mul(*ps):
    out = np.eye(3)
    for p in ps:
        out = out @ to_matrix(p)
    return from_matrix(out)


def mat_inv(p):
    return from_matrix(np.linalg.inv(to_matrix(p)))


def unit_ball(S, n, seed):
    return S.sample_ball(np.random.default_rng(seed), n, 1.0)


# -- basic values ----------------------------------------------------------------

def test_euclidean_approx_difference_example():
    a, b, eps = np.array([1.0, 0]), np.array([0.0, 1]), 0.5
    got = approx_difference(E2, O2, eps, a, b)
    assert np.allclose(got, b - a + eps * a, atol=1e-15)
    assert np.allclose(got, [-0.5, 1.0], atol=1e-15)


@pytest.mark.parametrize("S", [E2, H])
def test_approx_difference_diagonal_is_dilation(S):
    e, a = unit_ball(S, 2, 0)
    for eps in (0.9, 0.3, 0.01):
        assert np.allclose(approx_difference(S, e, eps, a, a), S.dilate(e, eps, a), atol=1e-12)


def test_heisenberg_approx_difference_at_identity():
    a, b = unit_ball(H, 2, 1)
    for eps in (0.7, 0.25, 0.05):
        expected = mat_mul(heis_dilation(eps, a), mat_inv(a), b)
        assert np.allclose(approx_difference(H, I3, eps, a, b), expected, rtol=0, atol=1e-12)


def test_approx_difference_at_eps_one_returns_b():
    for S in (E2, H):
        e, a, b = unit_ball(S, 3, 2)
        assert np.allclose(approx_difference(S, e, 1.0, a, b), b, atol=1e-14)


@pytest.mark.parametrize("eps", [0.0, -0.5, 1.5])
def test_approx_difference_rejects_eps(eps):
    with pytest.raises(DomainError):
        approx_difference(E2, O2, eps, O2, O2)


def test_limit_difference_examples():
    assert np.allclose(limit_difference(E2, O2, [1.0, 0], [0.0, 1]), [-1, 1])
    got = limit_difference(H, I3, np.array([1.0, 0, 0]), np.array([0.0, 1, 0]))
    assert np.allclose(got, [-1, 1, -0.5], atol=0)
    for S in (E2, H):
        e, a = unit_ball(S, 2, 3)
        assert np.allclose(limit_difference(S, e, a, a), e, atol=1e-15)


def test_heisenberg_limit_difference_general_base():
    e, a, b = unit_ball(H, 3, 4)
    assert np.allclose(H.limit_difference(e, a, b), mat_mul(e, mat_inv(a), b), atol=1e-12)


def test_gauge_values():
    assert H.gauge(np.array([0.0, 0, 1])) == pytest.approx(2.0, abs=1e-15)
    assert H.gauge(np.array([3.0, 4, 0])) == pytest.approx(5.0, abs=1e-14)


def test_as_points_rejects_nonfinite():
    with pytest.raises(DomainError):
        as_points([0.0, np.nan])
    with pytest.raises(DomainError):
        as_points([0.0, 1.0], dim=3)


def test_parse_space():
    assert parse_space("euclid:3") == EuclideanSpace(3)
    assert parse_space("heis1") == H
    for bad in ("euclid:0", "euclid:x", "heis2", "sphere:2"):
        with pytest.raises(DomainError):
            parse_space(bad)


# -- laws on seeded samples --------------------------------------------------------

def _law_samples(S, seed, n=1000):
    rng = np.random.default_rng(seed)
    x = S.sample_ball(rng, n, 1.0)
    y = S.sample_ball(rng, n, 1.0)
    eps = rng.uniform(0.05, 1.0, size=(n, 1))
    eta = rng.uniform(0.05, 1.0, size=(n, 1))
    return x, y, eps, eta


def coord_err(p, q):
    return np.max(np.abs(p - q))


@pytest.mark.parametrize("S", [E2, EuclideanSpace(5), H])
def test_dilation_laws(S):
    x, y, eps, eta = _law_samples(S, 11)
    assert coord_err(S.dilate(x, 1.0, y), y) <= 1e-12
    assert coord_err(S.dilate(x, eps, x), x) <= 1e-12
    assert coord_err(S.dilate(x, eps, S.dilate(x, eta, y)), S.dilate(x, eps * eta, y)) <= 1e-12
    assert coord_err(S.dilate(x, 1 / eps, S.dilate(x, eps, y)), y) <= 1e-12
    assert coord_err(S.dilate(x, eps, S.dilate(x, 1 / eps, y)), y) <= 1e-12


@pytest.mark.parametrize("S", [E2, H])
def test_metric_axioms(S):
    rng = np.random.default_rng(5)
    p, q, r = (S.sample_ball(rng, 1000, 1.0) for _ in range(3))
    assert np.all(S.distance(p, q) >= 0)
    assert np.allclose(S.distance(p, q), S.distance(q, p), atol=1e-12)
    assert np.all(S.distance(p, p) <= 1e-12)
    assert np.all(S.distance(p, r) <= S.distance(p, q) + S.distance(q, r) + 1e-12)


def test_heisenberg_homogeneity_and_left_invariance():
    rng = np.random.default_rng(6)
    m, p, q, g = (H.sample_ball(rng, 1000, 1.0) for _ in range(4))
    eps = rng.uniform(0.01, 2.0, size=1000)
    assert np.max(np.abs(H.gauge(heis_dilation(eps, m)) - eps * H.gauge(m))) <= 1e-12
    assert np.max(np.abs(H.distance(heis_mul(g, p), heis_mul(g, q)) - H.distance(p, q))) <= 1e-12


def test_heisenberg_dilation_is_group_automorphism():
    a, b = unit_ball(H, 2, 7)
    for eps in (0.3, 2.0):
        lhs = heis_dilation(eps, mat_mul(a, b))
        rhs = mat_mul(heis_dilation(eps, a), heis_dilation(eps, b))
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_sample_ball_stays_in_ball():
    for S in (E2, H):
        rng = np.random.default_rng(8)
        center = unit_ball(S, 1, 9)[0]
        pts = S.sample_ball(rng, 500, 0.3, center)
        assert pts.shape == (500, S.dim)
        assert np.all(S.distance(center, pts) <= 0.3 + 1e-12)


# -- approximate axiom 1 -----------------------------------------------------------

@pytest.mark.parametrize("S", [E2, H])
def test_approx_axiom1_examples(S):
    e, a, b, c = unit_ball(S, 4, 12)
    bound = 1e-12 if S is E2 else 1e-9
    eps = 0.25 if S is E2 else 0.5
    assert check_approx_axiom1(S, e, eps, a, b, c) <= bound
    assert check_approx_axiom1(S, e, eps, a, a, a) == 0.0


def test_approx_axiom1_float_coordinates():
    # In floats the identity holds to rounding in coordinates; the gauge
    # distance of a 1e-16 central error is ~1e-8, hence the exact default.
    for S in (E2, H):
        q = [unit_ball(S, 1000, s) for s in range(20, 24)]
        for eps in (0.9, 0.5, 0.1, 0.01):
            assert approx_axiom1_coordinate_error(S, *q[:1], eps, *q[1:]).max() <= 1e-9


def test_approx_axiom1_detects_a_wrong_identity():
    e, a, b, c = unit_ball(H, 4, 13)
    # swapping the base point of the outer difference must break it
    lhs = approx_difference(H, e, 0.5, approx_difference(H, e, 0.5, a, b),
                            approx_difference(H, e, 0.5, a, c))
    assert H.distance(lhs, approx_difference(H, e, 0.5, b, c)) > 1e-3


# -- convergence -----------------------------------------------------------------

def test_euclidean_convergence_closed_form():
    t = convergence_table(E2, O2, [1.0, 0], [0.0, 1], [0.5, 0.25, 0.125])
    assert np.allclose(t.gaps, [0.5, 0.25, 0.125], atol=1e-15)
    assert t.slope == pytest.approx(1.0, abs=1e-6)


def test_euclidean_gap_is_eps_times_distance_to_base():
    e, a, b = unit_ball(E2, 3, 14)
    eps = 2.0 ** -np.arange(1, 11)
    t = convergence_table(E2, e, a, b, eps)
    assert np.allclose(t.gaps, eps * np.linalg.norm(a - e), rtol=0, atol=1e-12)


def test_diagonal_gap_is_dilation_contraction():
    e, a = unit_ball(E2, 2, 15)
    eps = [0.5, 0.1, 0.01]
    t = convergence_table(E2, e, a, a, eps)
    assert np.allclose(t.gaps, [E2.distance(E2.dilate(e, x, a), e) for x in eps], atol=1e-15)
    assert t.slope == pytest.approx(1.0, abs=1e-9)


def heisenberg_gap_closed_form(a, b, eps):
    """d(dil_eps(a) w, w), w = a^-1 b, via the conjugation formula

    w^-1 g w = (g_x, g_y, g_z + g_x w_y - g_y w_x)  for g = dil_eps(a)^-1.
    """
    w = mat_mul(mat_inv(a), b)
    lin = a[0] * w[1] - a[1] * w[0]
    r2 = eps ** 2 * (a[0] ** 2 + a[1] ** 2)
    z = eps ** 2 * a[2] + eps * lin
    return (r2 ** 2 + 16 * z ** 2) ** 0.25, lin


def test_heisenberg_gap_matches_closed_form():
    eps = 2.0 ** -np.arange(1, 11)
    for k in range(20):
        a, b = unit_ball(H, 2, 100 + k)
        t = convergence_table(H, I3, a, b, eps)
        expected = np.array([heisenberg_gap_closed_form(a, b, x)[0] for x in eps])
        assert np.allclose(t.gaps, expected, rtol=1e-9, atol=0)


def test_heisenberg_gap_decays_at_half_order_for_generic_pairs():
    # gap ~ 2 sqrt(eps |a_h x w_h|) unless a_h and b_h are parallel
    eps = 2.0 ** -np.arange(20, 31)
    a, b = unit_ball(H, 2, 30)
    t = convergence_table(H, I3, a, b, eps)
    _, lin = heisenberg_gap_closed_form(a, b, 1.0)
    assert abs(lin) > 1e-3
    assert t.slope == pytest.approx(0.5, abs=1e-3)
    assert np.allclose(t.gaps / (2 * np.sqrt(eps * abs(lin))), 1.0, atol=1e-3)


def test_heisenberg_gap_first_order_for_parallel_horizontal_parts():
    a = np.array([0.4, 0.2, 0.1])
    b = np.array([-0.2, -0.1, 0.05])
    t = convergence_table(H, I3, a, b, 2.0 ** -np.arange(1, 11))
    assert t.slope == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("S", [E2, H])
def test_gap_monotone_and_vanishing(S):
    eps = 2.0 ** -np.arange(1, 16)
    for k in range(10):
        a, b = unit_ball(S, 2, 200 + k)
        gaps = convergence_table(S, S.base_point, a, b, eps).gaps
        assert np.all(np.diff(gaps) <= 1e-15)
        assert gaps[-1] < 0.05


def test_convergence_table_validation():
    with pytest.raises(DomainError):
        convergence_table(E2, O2, O2, O2, [])
    with pytest.raises(DomainError):
        convergence_table(E2, O2, O2, O2, [0.5, 2.0])


def test_loglog_slope_floor():
    assert loglog_slope([0.5, 0.25], [0.0, 0.0]) != loglog_slope([0.5, 0.25], [0.5, 0.25])
    assert loglog_slope([0.5, 0.25, 0.125], [4, 1, 0.25]) == pytest.approx(2.0)


# -- limit difference as a difference structure --------------------------------------

@pytest.mark.parametrize("S", [E2, H])
def test_limit_structure_satisfies_axioms_sampled(S):
    L = limit_structure(S)
    assert check_axiom1(L, Sampled(300, 1)).ok
    assert check_axiom2(L, Sampled(300, 1)).ok


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=9, max_size=9), st.floats(0.001, 1.0))
def test_heisenberg_approx_axiom_property(coords, eps):
    e, a, b = np.array(coords).reshape(3, 3) * np.array([1, 1, 0.25])
    c = limit_difference(H, e, a, b)
    assert check_approx_axiom1(H, e, eps, a, b, c) == 0.0
