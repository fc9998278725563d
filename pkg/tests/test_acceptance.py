"""Acceptance criteria 1 to 11, one test each, at their stated tolerances.

Each test records a short detail string; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from capsys import capacities as cap
from capsys import cli
from capsys import dual
from capsys import geometry as geo
from capsys import john
from capsys import loops as lp
from capsys import paper_examples as pe
from capsys import zoll
from conftest import random_symmetric_vertices

BODIES = Path(__file__).resolve().parents[1] / "bodies"


def load(d, name):
    import json

    return json.loads((d / name).read_text())


@pytest.fixture
def detail(record_property):
    def put(text):
        record_property("detail", text)
    return put


@pytest.fixture(scope="module")
def nested_pairs():
    """Ten pairs K1 in K2 of random symmetric polytopes in R^4 with their solved c1."""
    rng = np.random.default_rng(2024)
    cfg = dual.SolveConfig(starts=4, seed=1)
    pairs = []
    for _ in range(10):
        V2 = random_symmetric_vertices(rng)
        half = V2[: len(V2) // 2]
        keep = rng.choice(len(half), 8, replace=False)
        V1 = half[keep] * rng.uniform(0.7, 1.0, (8, 1))
        K1, K2 = geo.make_vpolytope(np.vstack([V1, -V1])), geo.make_vpolytope(V2)
        pairs.append((K1, K2, cap.c1_numeric(K1, cfg), cap.c1_numeric(K2, cfg)))
    return pairs


def test_criterion_1_ball_capacity(tmp_path, detail):
    code = cli.main(["capacity", "--ellipsoid", "1,1", "--modes", "24", "--starts", "8",
                     "--out", str(tmp_path)])
    out = load(tmp_path, "capacity.json")
    num = out["numeric"]
    sysl = num["systole"]
    detail(f"exit {code}, c1 {out['c1']:.6g} closed form, {num['c1']:.10g} numeric, "
           f"boundary {sysl['boundary_residual']:.2e}, inclusion {sysl['inclusion_residual']:.2e}")
    assert code == 0
    assert 0.99 <= out["c1"] <= 1.01 and 0.99 <= num["c1"] <= 1.01
    assert sysl["boundary_residual"] <= 1e-3 and sysl["inclusion_residual"] <= 1e-2


def test_criterion_2_bxb1_capacity(tmp_path, detail):
    t0 = time.perf_counter()
    code = cli.main(["capacity", "--body", str(BODIES / "bxb1.json"), "--starts", "16",
                     "--out", str(tmp_path)])
    wall = time.perf_counter() - t0
    c1 = load(tmp_path, "capacity.json")["c1"]
    detail(f"exit {code}, c1 {c1:.8g}, {wall:.1f} s")
    assert code == 0 and 3.92 <= c1 <= 4.08 and wall <= 30


def test_criterion_3_index_tables(detail):
    got = {
        "E(1,1)": cap.sys_index(cap.ellipsoid_sequence([1, 1], 8)),
        "E(1,2)": cap.sys_index(cap.ellipsoid_sequence([1, 2], 8)),
        "E(1,1,1)": cap.sys_index(cap.ellipsoid_sequence([1, 1, 1], 8)),
        "P(1,1)": cap.sys_index(cap.polydisc_sequence(1, 2, 8)),
    }
    ball_zoll = cap.is_generalized_zoll(cap.ellipsoid_sequence([1, 1], 8), 2)
    poly_zoll = cap.is_generalized_zoll(cap.polydisc_sequence(1, 2, 8), 2)
    detail(", ".join(f"{k} {v}" for k, v in got.items()) + f", zoll ball {ball_zoll} polydisc {poly_zoll}")
    assert got == {"E(1,1)": 2, "E(1,2)": 1, "E(1,1,1)": 3, "P(1,1)": 1}
    assert ball_zoll and not poly_zoll


def test_criterion_4_gamma_regression(bxb1, detail):
    M = 10_000
    g = pe.bxb1_gamma(M)
    res = {"gamma": dual.inclusion_residual(bxb1, g, 4.0)}
    sups, gaps = {}, {}
    for n in (2, 4, 8):
        gn = pe.bxb1_gamma_n(n, M)
        res[f"gamma_{n}"] = dual.inclusion_residual(bxb1, gn, 4.0)
        sups[n] = float(np.abs(g.samples - gn.samples).max())
        gaps[n] = pe.w11_gap(n, M)
    detail(f"max residual {max(res.values()):.1e}, sup {sups}, W11 gaps {gaps}")
    assert max(res.values()) <= 1e-9
    assert all(sups[n] <= 1 / n for n in sups) and all(v >= 2 for v in gaps.values())


def test_criterion_5_action_identity(rng, detail):
    worst = 0.0
    for _ in range(100):
        N = int(rng.integers(1, 17))
        x = lp.FourierLoop(rng.standard_normal((2 * N, 4)))
        loop = lp.to_time(x, 8 * N)
        s, v = loop.samples, loop.derivative
        quad = 0.5 * np.mean(np.einsum("ij,ij->i", v, geo.apply_J0(s)))
        exact = lp.action(x)
        worst = max(worst, abs(quad - exact) / abs(exact))
    detail(f"worst relative difference {worst:.1e}")
    assert worst <= 1e-10


def test_criterion_6_conjugate_oracle(rng, bxb1, cube, detail):
    worst = {}
    bodies = {"cube": cube, "bxb1": bxb1,
              "random": geo.make_vpolytope(random_symmetric_vertices(rng))}
    for name, K in bodies.items():
        V = john.body_vertices(K)
        X = np.vstack([V, K.boundary_points(10_000 - len(V), rng)])
        H = geo.gauge2(K, X)
        U = rng.standard_normal((100, 4))
        # sup over rays s * x of <u, s x> - s^2 H(x) is <u, x>_+^2 / (4 H(x))
        ip = np.maximum(U @ X.T, 0)
        direct = np.max(ip**2 / (4 * H), axis=1)
        worst[name] = float(np.max(np.abs(geo.conj(K, U) - direct) / direct))
    detail(", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert max(worst.values()) <= 1e-6


def test_criterion_7_covariances(bxb1, bxb1_solved, detail):
    cfg = dual.SolveConfig(starts=4)
    c = bxb1_solved[0][0].value
    ratios = {lam: cap.c1_numeric(geo.scale(bxb1, lam), cfg) / (lam**2 * c) for lam in (0.5, 2.0)}
    rng = np.random.default_rng(7)
    v = rng.standard_normal(4)
    v *= 0.3 / np.sqrt(geo.gauge2(bxb1, v))
    shifted = cap.c1_numeric(geo.translate(bxb1, v), cfg)
    detail(f"scale ratios {ratios}, translated c1 {shifted:.6g} vs {c:.6g}")
    assert all(abs(r - 1) <= 0.02 for r in ratios.values())
    assert abs(shifted - c) < 0.02 * c


def test_criterion_8_monotonicity(nested_pairs, detail):
    for K1, K2, _, _ in nested_pairs:
        # nesting holds by construction; confirm it through the support functions
        U = np.random.default_rng(0).standard_normal((1000, 4))
        assert np.all(geo.support(K1, U) <= geo.support(K2, U) + 1e-12)
    ratios = [c1 / c2 for _, _, c1, c2 in nested_pairs]
    detail(f"max c1(K1)/c1(K2) {max(ratios):.4f} over {len(ratios)} pairs")
    assert all(r <= 1.02 for r in ratios)


def test_criterion_9_john(cube, bxb1, bxb1_solved, nested_pairs, detail):
    res = john.john_for_body(cube)
    radius_err = float(np.abs(res.shape - np.eye(4) / 4).max())
    sandwich = bool(john.verify_sandwich(cube, res)) and bool(john.verify_sandwich(bxb1, john.john_for_body(bxb1)))
    bounds = [john.capacity_bound_report(bxb1, john.john_for_body(bxb1), bxb1_solved[0][0].value)]
    for K1, K2, c1, c2 in nested_pairs:
        for K, c in ((K1, c1), (K2, c2)):
            jr = john.john_for_body(K)
            sandwich &= bool(john.verify_sandwich(K, jr))
            bounds.append(john.capacity_bound_report(K, jr, c))
    dominated = sum(b["consistent"] for b in bounds)
    ib = (cap.index_bound(2, "general"), cap.index_bound(2, "centrally_symmetric"),
          cap.index_bound(2, "s1_invariant"))
    detail(f"shape error {radius_err:.1e}, sandwich {sandwich}, bound dominates {dominated}/{len(bounds)}, "
           f"index bounds {ib}")
    assert radius_err <= 1e-6 and sandwich and dominated == len(bounds) == 21
    assert ib == (32, 8, 2)


def test_criterion_10_zoll(ball, bxb1, bxb1_solved, detail):
    ball_runs = dual.solve(ball, dual.SolveConfig(starts=200))
    rb = zoll.report(ball_runs, ball)
    e12 = geo.make_ellipsoid([1, 2])
    re = zoll.report(dual.solve(e12, dual.SolveConfig(starts=16)), e12)
    injected = [zoll.result_from_loop(bxb1, g, 4.0)
                for g in [pe.bxb1_gamma(2000), pe.bxb1_gamma_n(1, 2000)] + pe.bxb1_families(M=2000)]
    rx = zoll.report(list(bxb1_solved[0]) + injected, bxb1)
    detail(f"ball {len(rb['clusters'])} cluster(s) coverage {rb['coverage']:.3f}; "
           f"E(1,2) {len(re['clusters'])} cluster(s) coverage {re['coverage']:.3f}; "
           f"bxb1 {len(rx['clusters'])} clusters coverage {rx['coverage']:.3f} uniqueness {rx['uniqueness']}")
    assert rb["coverage"] >= 0.95 and len(rb["clusters"]) == 1
    assert re["coverage"] <= 0.2 and len(re["clusters"]) == 1
    assert len(rx["clusters"]) >= 3 and rx["coverage"] == 1.0 and rx["uniqueness"] is False


def test_criterion_11_determinism(tmp_path, detail):
    commands = [
        ["capacity", "--ellipsoid", "1,1", "--modes", "24", "--starts", "8"],
        ["capacity", "--body", str(BODIES / "bxb1.json"), "--modes", "12", "--starts", "4"],
        ["index", "--ellipsoid", "1,1,1"],
        ["zoll", "--body", str(BODIES / "e12.json"), "--modes", "12", "--starts", "6"],
        ["john", "--body", str(BODIES / "cube4.json"), "--modes", "12", "--starts", "2"],
        ["demo", "bxb1-w11"],
    ]
    compared = 0
    for i, argv in enumerate(commands):
        dirs = []
        for j, threads in enumerate(("1", "2", "1")):
            d = tmp_path / f"c{i}_{j}"
            assert cli.main([*argv, "--seed", "3", "--threads", threads, "--out", str(d)]) == 0
            dirs.append(d)
        names = sorted(p.name for p in dirs[0].glob("*.json") if p.name != "manifest.json")
        for d in dirs[1:]:
            assert sorted(p.name for p in d.glob("*.json") if p.name != "manifest.json") == names
            for name in names:
                assert (d / name).read_bytes() == (dirs[0] / name).read_bytes(), (argv, name)
                compared += 1
    detail(f"{compared} JSON artifacts byte-identical across threads 1/2 and repeats")
