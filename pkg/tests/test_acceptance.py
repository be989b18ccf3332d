"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are written
straight to the terminal so they also land in tee'd logs.
"""

import time

import numpy as np
import pytest

from rauzy_lab import cli, exact
from rauzy_lab.analysis import (L_vector, bounded_partial_sums, c1_distance, log_slope, m_n_coefficient,
                                moebius_F, pseudo_orbit_residual, zoom_return_branch)
from rauzy_lab.checks import class_identities, oracle_equivalence, q_identity, smoothing_battery
from rauzy_lab.cocycle import (CocyclePath, central_space_limit, growth_estimate, periodic_central_space,
                               periodic_closure, quasi_isometry_ratio, unstable_seed)
from rauzy_lab.combinatorics import omega_matrix
from rauzy_lab.experiments import affine_comparison, moebius_comparison, pair_comparison, residual_series
from rauzy_lab.induction import renormalize
from rauzy_lab.maps import make_affine_iem
from rauzy_lab.presets import (D3_PAIR, GOLDEN_PAIR, d3_fibonacci_types, golden_standard, golden_types,
                               moebius_kink_map, moebius_pair_map, partner_map, random_genus_one_map,
                               random_standard_map)

GRID = 4097
LEVELS = np.arange(1, 16)
D3_LADDER = [15, 39, 102, 267]


@pytest.fixture
def report(capsys):
    """Print one criterion line, then fail the test if the check or the time budget failed."""
    start = time.perf_counter()

    def emit(number, ok, detail, budget=None):
        elapsed = time.perf_counter() - start
        in_time = budget is None or elapsed < budget
        limit = "" if budget is None else " / %gs" % budget
        line = "criterion %2d: %s  %s  [%.2fs%s]" % (number, "PASS" if ok and in_time else "FAIL",
                                                   detail, elapsed, limit)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
        assert in_time, line

    return emit


def decays(values, first=3, factor=0.2):
    values = np.asarray(values, dtype=float)
    return values[-1] < factor * values[:first].max()


def test_criterion_01_cocycle_identities(report):
    edges = bad = 0
    for mono in [(2, 1), (3, 2, 1)]:
        for _, _, det_ok, omega_ok in class_identities(mono):
            edges += 1
            bad += not (det_ok and omega_ok)
    report(1, bad == 0 and edges > 0, "%d edges, %d violations" % (edges, bad), budget=1.0)


def test_criterion_02_return_times(report):
    _, _, bad_golden = q_identity(golden_standard(), 25)
    states = renormalize(golden_standard(), 4)
    fib_ok = [s.q for s in states] == [(1, 1), (2, 1), (2, 3), (5, 3), (5, 8)]
    _, _, bad_d3 = q_identity(random_standard_map(np.random.default_rng(2024), D3_PAIR), 25)
    ok = not bad_golden and not bad_d3 and fib_ok
    report(2, ok, "golden bad levels %d, d3 bad levels %d, Fibonacci pairs %s"
           % (len(bad_golden), len(bad_d3), fib_ok), budget=1.0)


def test_criterion_03_oracle_equivalence(report):
    rng = np.random.default_rng(2024)
    worst, mismatches, dims = 0.0, 0, set()
    for _ in range(20):
        f = random_genus_one_map(rng)
        dims.add(f.d)
        err, mism, _ = oracle_equivalence(f, 8, 100, rng)
        worst, mismatches = max(worst, err), mismatches + mism
    ok = worst <= 1e-9 and mismatches == 0 and max(dims) <= 4
    report(3, ok, "max error %.2e, time mismatches %d, d in %s" % (worst, mismatches, sorted(dims)),
           budget=30.0)


def test_criterion_04_hyperbolicity(report):
    golden = CocyclePath.from_types(GOLDEN_PAIR, golden_types(20))
    fwd = growth_estimate(golden, unstable_seed(GOLDEN_PAIR), "forward")
    end = golden.pair_at(20)
    seed = np.array(omega_matrix(end), dtype=float) @ np.ones(2)
    bwd = growth_estimate(golden, seed, "backward")
    control = CocyclePath.from_types(GOLDEN_PAIR, [0] * 20)
    ctl = growth_estimate(control, unstable_seed(GOLDEN_PAIR), "forward")
    ok = 1.55 <= fwd.rate <= 1.70 and 1.55 <= bwd.rate <= 1.70 and ctl.rate < 1.1
    report(4, ok, "forward %.4f, backward %.4f, constant-type control %.4f"
           % (fwd.rate, bwd.rate, ctl.rate), budget=1.0)


def test_criterion_05_central_space(report):
    dim2 = periodic_central_space(CocyclePath.from_types(GOLDEN_PAIR, [0, 1])).basis.dim
    types, _ = d3_fibonacci_types(89)
    d3 = CocyclePath.from_types(D3_PAIR, types)
    closed = periodic_central_space(periodic_closure(d3, D3_LADDER[0]))
    fixed = all(exact.matvec(closed.period_matrix, v) == v for v in closed.fixed_vectors)
    limit = central_space_limit(d3, D3_LADDER)
    ratio = quasi_isometry_ratio(d3, limit.basis.vectors[0], 30)
    ok = dim2 == 0 and closed.basis.dim == 1 and fixed and limit.accepted and ratio <= 10
    report(5, ok, "dim E^c: d=2 %d, d=3 %d; period fixes E^c %s; quasi-isometry ratio %.3f"
           % (dim2, closed.basis.dim, fixed, ratio), budget=5.0)


def test_criterion_06_moebius_trend(report):
    series = moebius_comparison(moebius_kink_map(), 15, GRID)
    c1, l1 = series.array("c1"), series.array("l1_d2")
    s_c1, s_l1 = log_slope(c1, LEVELS), log_slope(l1, LEVELS)
    # the zoomed branch has to be resolved by the grid: compare with a finer one at n = 15
    f = moebius_kink_map()
    st = renormalize(f, 15)[15]
    fine = [c1_distance(zoom_return_branch(st, f, "A", g), moebius_F(m_n_coefficient(f, st, "A"), g))
            for g in (4097, 8193)]
    grid_rel = abs(fine[1] - fine[0]) / fine[1]
    # a composition of Moebius branches is Moebius, so the pure map stays at round-off
    pure = moebius_comparison(moebius_pair_map(), 15, GRID)
    pure_max = max(pure.array("c1").max(), pure.array("l1_d2").max())
    ok = (s_c1 < 0 and s_l1 < 0 and decays(c1) and decays(l1) and grid_rel <= 0.02
          and pure_max < 1e-9)
    report(6, ok, "C1 slope %.3f, a15/max(a1..a3) %.3f; L1-D2 slope %.3f, ratio %.3f; "
           "grid change %.1e; pure Moebius max %.1e"
           % (s_c1, c1[-1] / c1[:3].max(), s_l1, l1[-1] / l1[:3].max(), grid_rel, pure_max), budget=120.0)


def test_criterion_07_affine_model_trend(report):
    series, model = affine_comparison(moebius_kink_map(), 15, GRID)
    c1, gap = series.array("c1"), series.array("zeta_gap")
    s_c1, s_gap = log_slope(c1, LEVELS), log_slope(gap, LEVELS)
    sums = bounded_partial_sums(gap ** 2)
    ok = model.matched >= 15 and s_c1 < 0 and s_gap < 0 and sums["ok"]
    report(7, ok, "C1 slope %.3f, length gap slope %.3f, sum-of-squares ratio %.3f, matched %d"
           % (s_c1, s_gap, sums["growth_ratio"], model.matched), budget=180.0)


def test_criterion_08_break_equivalent_pair(report):
    series = pair_comparison(moebius_kink_map(), partner_map(), 15, GRID)
    c1 = series.array("c1")
    slope = log_slope(c1, LEVELS)
    sums = bounded_partial_sums(c1 ** 2)
    ok = slope < 0 and sums["ok"]
    report(8, ok, "C1 slope %.3f, sum-of-squares ratio %.3f" % (slope, sums["growth_ratio"]), budget=180.0)


def test_criterion_09_cocycle_residuals(report):
    parts, ok = [], True
    for name, f in (("f", moebius_kink_map()), ("g", partner_map())):
        res = residual_series(f, 20)
        sums = bounded_partial_sums(res.array("eps_norm") ** 2)
        ok &= sums["ok"]
        parts.append("%s sum ratio %.3f" % (name, sums["growth_ratio"]))
    rng = np.random.default_rng(9)
    lam = rng.dirichlet(np.ones(3))
    omega = rng.normal(0.0, 0.1, 3)
    omega -= np.log(np.sum(lam * np.exp(omega)))
    g = make_affine_iem(D3_PAIR, lam, omega)
    states = renormalize(g, 12)
    cpath = CocyclePath(states[-1].history)
    Ls = [L_vector(s, g) for s in states]
    affine_max = max(pseudo_orbit_residual(Ls[n], Ls[n + 1], cpath.thetas[n])[1] for n in range(12))
    ok &= affine_max <= 1e-9
    report(9, ok, "%s; affine residual max %.1e" % ("; ".join(parts), affine_max))


def test_criterion_10_smoothing_battery(report):
    violations, rows = smoothing_battery(np.random.default_rng(2024))
    report(10, violations == 0 and len(rows) == 3000,
           "%d sequences, %d violations" % (len(rows), violations), budget=5.0)


def test_criterion_11_selftest_determinism(report, tmp_path):
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        code = cli.main(["selftest", "--out", str(out), "--seed", "2024", "--no-plots"])
        outputs.append((code, {p.name: p.read_bytes() for p in sorted(out.iterdir())}))
    (code_a, files_a), (code_b, files_b) = outputs
    ok = code_a == code_b == 0 and files_a == files_b and len(files_a) >= 2
    report(11, ok, "exit codes %d/%d, %d files byte-identical %s"
           % (code_a, code_b, len(files_a), files_a == files_b))
