import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capsys import capacities as cap
from capsys import dual
from capsys import geometry as geo
from capsys import john
from conftest import random_symmetric_vertices


def form(res, P):
    R = np.asarray(P) - res.center
    return np.einsum("ij,jk,ik->i", R, res.shape, R)


class TestEnclosing:
    def test_square(self):
        V = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], float)
        res = john.enclosing_ellipsoid(V, centrally_symmetric=True)
        np.testing.assert_allclose(res.shape, np.eye(2) / 2, atol=1e-6)
        assert np.all(res.center == 0)

    def test_cube(self, cube):
        res = john.enclosing_ellipsoid(geo.cube_vertices(4), centrally_symmetric=True)
        np.testing.assert_allclose(res.shape, np.eye(4) / 4, atol=1e-6)

    def test_general_mode_on_a_shifted_cube(self):
        V = geo.cube_vertices(3) + np.array([0.5, -1.0, 2.0])
        res = john.enclosing_ellipsoid(V)
        np.testing.assert_allclose(res.center, [0.5, -1.0, 2.0], atol=1e-6)
        np.testing.assert_allclose(res.shape, np.eye(3) / 3, atol=1e-5)

    def test_triangle(self):
        # the minimal ellipse of an equilateral triangle is its circumcircle
        th = 2 * np.pi * np.arange(3) / 3 + 0.4
        V = np.column_stack([np.cos(th), np.sin(th)]) + [2.0, 1.0]
        res = john.enclosing_ellipsoid(V, tol=1e-9)
        np.testing.assert_allclose(res.center, [2.0, 1.0], atol=1e-6)
        np.testing.assert_allclose(res.shape, np.eye(2), atol=1e-6)

    @pytest.mark.parametrize("sym", [False, True])
    def test_degenerate(self, sym):
        P = np.array([[0, 0], [1, 1], [2, 2]], float)
        with pytest.raises(ValueError):
            john.enclosing_ellipsoid(P, centrally_symmetric=sym)

    @pytest.mark.parametrize("tol", [0.0, 0.1])
    def test_bad_tol(self, tol):
        with pytest.raises(ValueError):
            john.enclosing_ellipsoid(geo.cube_vertices(2), tol=tol)

    @given(st.integers(0, 10_000), st.booleans())
    def test_certificates(self, seed, sym):
        rng = np.random.default_rng(seed)
        P = random_symmetric_vertices(rng, 6, 4) if sym else rng.standard_normal((12, 4))
        res = john.enclosing_ellipsoid(P, tol=1e-6, centrally_symmetric=sym)
        assert res.duality_gap <= 1e-6
        assert form(res, P).max() <= 1 + 1e-6
        if sym:
            assert np.all(res.center == 0)
        # shrinking along a random axis expels a point
        for _ in range(3):
            u = rng.standard_normal(4)
            u /= np.linalg.norm(u)
            S = np.eye(4) - 2e-6 * np.outer(u, u)
            Si = np.linalg.inv(S)
            R = P - res.center
            assert np.einsum("ij,jk,ik->i", R, Si.T @ res.shape @ Si, R).max() > 1


class TestSandwich:
    def test_cube_is_tight(self, cube):
        res = john.john_for_body(cube)
        assert res.centrally_symmetric and res.sandwich_factor == 0.5
        rep = john.verify_sandwich(cube, res)
        assert rep and rep.margin >= 0
        # the inner ball has radius 1 and touches the facets x_i = +-1
        assert res.sandwich_factor / np.sqrt(res.shape[0, 0]) == pytest.approx(1.0, abs=1e-6)

    def test_random_symmetric(self, rng):
        for _ in range(5):
            K = geo.make_vpolytope(random_symmetric_vertices(rng))
            assert john.verify_sandwich(K, john.john_for_body(K))

    def test_general_flavor(self, rng):
        V = rng.standard_normal((15, 4))
        K = geo.make_vpolytope(V)
        res = john.john_for_body(K)
        assert not res.centrally_symmetric and res.sandwich_factor == 0.25
        assert john.verify_sandwich(K, res)

    def test_wrong_ellipsoid(self, cube):
        res = john.john_for_body(cube)
        bad = john.JohnResult(res.center, 2 * res.shape, 0, 0.0, True)
        rep = john.verify_sandwich(cube, bad)
        assert not rep and not rep.outer_ok

    def test_inner_failure(self, cube):
        res = john.john_for_body(cube)
        res.shape = res.shape / 4
        rep = john.verify_sandwich(cube, res)
        assert rep.outer_ok and not rep.inner_ok
        assert rep.worst_direction is not None and rep.margin < 0

    @pytest.mark.parametrize("name", ["ball", "bxb1", "cube"])
    def test_shipped_bodies(self, name, request):
        body = request.getfixturevalue(name)
        assert john.verify_sandwich(body, john.john_for_body(body))


class TestBodies:
    def test_ellipsoid_is_its_own(self, ball):
        res = john.john_for_body(ball)
        np.testing.assert_allclose(res.shape, ball.shape)
        assert res.c1_bound() == pytest.approx(1.0)

    def test_scaled(self, ball):
        res = john.john_for_body(geo.scale(ball, 2.0))
        assert res.c1_bound() == pytest.approx(4.0)

    def test_bxb1_vertices(self, bxb1):
        V = john.body_vertices(bxb1)
        assert V.shape == (16, 4)
        np.testing.assert_allclose(geo.gauge2(bxb1, V), 1.0)

    def test_no_route(self):
        class Blob(geo.Body):
            kind = "blob"

        with pytest.raises(ValueError):
            john.john_for_body(object.__new__(Blob))

    def test_as_body(self, cube):
        E = john.john_for_body(cube).ellipsoid
        assert isinstance(E, geo.Ellipsoid) and geo.gauge2(E, np.full(4, 1.0)) == pytest.approx(1.0)

    def test_json(self, cube):
        js = john.john_for_body(cube).to_json()
        assert set(js) == {"center", "shape", "gap", "a_normal_form", "c1_bound"}
        np.testing.assert_allclose(js["a_normal_form"], [4 * np.pi, 4 * np.pi], rtol=1e-5)


class TestCapacityBound:
    def test_ball(self, ball, ball_solved):
        rep = john.capacity_bound_report(ball, john.john_for_body(ball), ball_solved[0].value)
        assert rep["c1_bound"] == pytest.approx(1.0) and rep["consistent"]
        assert rep["index_flavor"] == "centrally_symmetric" and rep["index_bound"] == 8

    def test_bxb1(self, bxb1, bxb1_solved):
        rep = john.capacity_bound_report(bxb1, john.john_for_body(bxb1), bxb1_solved[0][0].value)
        assert rep["c1_bound"] >= 4 * (1 - 1e-2) and rep["consistent"]

    def test_computes_c1(self, ball):
        rep = john.capacity_bound_report(ball, john.john_for_body(ball), cfg=dual.SolveConfig(starts=1))
        assert rep["c1_numeric"] == pytest.approx(1.0, rel=1e-2)

    def test_general_flavor(self, rng):
        K = geo.make_vpolytope(rng.standard_normal((15, 4)))
        rep = john.capacity_bound_report(K, john.john_for_body(K), 1.0)
        assert rep["index_flavor"] == "general" and rep["index_bound"] == cap.index_bound(2)
