"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Scenario-backed criteria execute the built-in scenarios at their frozen
parameters; property criteria run >= 10^4 randomized cases each against
independently computed bounds.  Tolerances are pinned here, not tuned at
run time.
"""

import numpy as np

import conftest
from subgradnet.dynamics import step, verify_iterate_inequality, disturbance_bound_check
from subgradnet.graphs import (
    contraction_coefficient,
    cyclic_perron_family,
    is_ujsc,
    transition_product,
    validate_weight_matrix,
)
from subgradnet.objectives import (
    Box,
    EuclideanBall,
    QuadL1Cost,
    lasso_ensemble,
    separating_weights,
)
from subgradnet.reporting import format_trace_csv
from subgradnet.scenarios import get_scenario, run_scenario
from subgradnet.schedules import periodic_schedule


def report(criterion, passed, detail):
    line = f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} - {detail}"
    print(line, flush=True)
    conftest.acceptance_lines.append(line)
    assert passed, line


def reference_distance(result, label):
    for plan, _, rep in result.references:
        if plan.label == label:
            return rep
    raise KeyError(label)


def test_criterion_1_fixed_doubly_stochastic_converges(scenario_cache):
    result = scenario_cache("prop1-doubly")
    rep = reference_distance(result, "uniform")
    ok = result.verdict.converged and rep.distance < 1e-3
    report(1, ok,
           f"prop1-doubly verdict={result.verdict.kind}, "
           f"distance to uniform-weighted optimum {rep.distance:.3e} (tol 1e-3)")


def test_criterion_2_fixed_general_graph_selects_stationary_weights(scenario_cache):
    result = scenario_cache("lemma3-fixed-general")
    near = reference_distance(result, "stationary-weighted")
    far = reference_distance(result, "uniform")
    separated = any("separated" in n for n in result.notes)
    ok = (result.verdict.converged and near.distance < 1e-3
          and separated and far.distance > 10.0 * near.distance)
    report(2, ok,
           f"lemma3-fixed-general verdict={result.verdict.kind}, "
           f"stationary-ref distance {near.distance:.3e} (tol 1e-3), "
           f"uniform-ref distance {far.distance:.3e} "
           f"({far.distance / max(near.distance, 1e-300):.1f}x)")


def test_criterion_3_free_switching_counterexample_oscillates(scenario_cache):
    result = scenario_cache("thm1-adversarial")
    rec = result.record
    pairs = rec.switch_pairs()
    witness = rec.gap / 3.0 - 1e-6
    ok = (result.verdict.oscillating and len(pairs) >= 5
          and all(d > witness for d in pairs))
    report(3, ok,
           f"thm1-adversarial verdict={result.verdict.kind}, "
           f"{len(pairs)} switch pairs, min displacement "
           f"{min(pairs):.4f} > gap/3 - 1e-6 = {witness:.4f}")


def test_criterion_4_shared_minimizer_always_converges(scenario_cache):
    result = scenario_cache("thm2-shared-min")
    rep = reference_distance(result, "shared-minimizer")
    ok = result.verdict.converged and rep.distance < 1e-3
    report(4, ok,
           f"thm2-shared-min verdict={result.verdict.kind}, "
           f"distance to shared minimizer {rep.distance:.3e} (tol 1e-3)")


def test_criterion_5_weight_tilting_realizes_nonconvergence(scenario_cache):
    rng = np.random.Generator(np.random.Philox(key=88))
    q = rng.uniform(-1.5, 1.5, size=(5, 2))
    ens = lasso_ensemble(q, 0.1, 2.0)
    sep = separating_weights(ens, tol=1e-3)
    from subgradnet.graphs import construct_matrix_with_perron, perron_vector

    a1 = construct_matrix_with_perron(sep.uniform_weights)
    a2 = construct_matrix_with_perron(sep.tilted_weights)
    realized1 = np.abs(perron_vector(a1).weights - sep.uniform_weights).max()
    realized2 = np.abs(perron_vector(a2).weights - sep.tilted_weights).max()
    result = scenario_cache("thm2-necessity")
    ok = (sep.gap > 10 * 1e-3 and realized1 < 1e-10 and realized2 < 1e-10
          and result.verdict.oscillating)
    report(5, ok,
           f"thm2-necessity: separation gap {sep.gap:.4f} (> 1e-2), weight vectors "
           f"realized to {max(realized1, realized2):.1e}, verdict={result.verdict.kind}")


def test_criterion_6_periodic_limit_uses_period_averaged_weights(scenario_cache):
    result = scenario_cache("thm3-periodic")
    near = reference_distance(result, "period-averaged")
    far = reference_distance(result, "product-shortcut")
    separated = any("separated" in n for n in result.notes)
    ok = (result.verdict.converged and near.distance < 1e-2 and separated
          and far.distance >= 5.0 * near.distance)
    report(6, ok,
           f"thm3-periodic verdict={result.verdict.kind}, period-averaged distance "
           f"{near.distance:.3e} (tol 1e-2), product-shortcut distance "
           f"{far.distance:.3e} ({far.distance / max(near.distance, 1e-300):.1f}x)")


def random_stochastic(rng, n, floor=0.02):
    raw = rng.uniform(floor, 1.0, size=(n, n))
    a = raw / raw.sum(axis=1, keepdims=True)
    return validate_weight_matrix(a, float(a.min()))


def test_criterion_7_cyclic_stationary_identities():
    rng = np.random.Generator(np.random.Philox(key=700))
    worst_chain = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        a1, a2 = random_stochastic(rng, n), random_stochastic(rng, n)
        fam = cyclic_perron_family([a1, a2])
        mu1, mu2 = fam.vectors
        worst_chain = max(worst_chain,
                          float(np.abs(mu2.weights - a2.entries.T @ mu1.weights).sum()))
    worst_rotation = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        mats = [random_stochastic(rng, n) for _ in range(3)]
        s1 = cyclic_perron_family(mats).sum_weights
        s2 = cyclic_perron_family(mats[1:] + mats[:1]).sum_weights
        s3 = cyclic_perron_family(mats[2:] + mats[:2]).sum_weights
        worst_rotation = max(worst_rotation,
                             float(np.abs(s1 - s2).max()), float(np.abs(s1 - s3).max()))
    ok = worst_chain < 1e-10 and worst_rotation < 1e-10
    report(7, ok,
           f"100 pairs: worst push-through residual {worst_chain:.2e}; "
           f"100 triples: worst rotation deviation {worst_rotation:.2e} (tol 1e-10)")


def test_criterion_8_quasi_periodic_dichotomy(scenario_cache):
    res2 = scenario_cache("thm4-quasi-p2")
    rep2 = reference_distance(res2, "period-averaged")
    res3 = scenario_cache("thm4-quasi-p3")
    ok = (res2.verdict.converged and rep2.distance < 1e-2
          and res3.verdict.oscillating)
    report(8, ok,
           f"thm4-quasi-p2 verdict={res2.verdict.kind}, distance {rep2.distance:.3e} "
           f"(tol 1e-2); thm4-quasi-p3 verdict={res3.verdict.kind}")


# --- criterion 9: randomized structural property suites ---------------------

CASES = 10_000


def test_criterion_9a_projection_inequalities():
    rng = np.random.Generator(np.random.Philox(key=901))
    failures = 0
    for _ in range(CASES // 2):
        m = int(rng.integers(1, 5))
        if rng.uniform() < 0.5:
            omega = EuclideanBall(rng.uniform(-1, 1, size=m), float(rng.uniform(0.2, 3.0)))
        else:
            lo = rng.uniform(-2, 0, size=m)
            omega = Box(lo, lo + rng.uniform(0.1, 3.0, size=m))
        for _ in range(2):
            x = rng.uniform(-6, 6, size=m)
            y = omega.project(rng.uniform(-6, 6, size=m))
            px = omega.project(x)
            if np.linalg.norm(px - y) > np.linalg.norm(x - y) + 1e-9:
                failures += 1
            if (np.linalg.norm(px - y) ** 2
                    > np.linalg.norm(x - y) ** 2 - np.linalg.norm(x - px) ** 2 + 1e-9):
                failures += 1
    report("9a", failures == 0,
           f"projection inequalities: {CASES} sampled (x, y) pairs, {failures} failures")


def test_criterion_9b_subgradient_inequality_and_bound():
    rng = np.random.Generator(np.random.Philox(key=902))
    failures = 0
    for _ in range(CASES // 4):
        m = int(rng.integers(1, 5))
        f = QuadL1Cost(rng.uniform(-2, 2, size=m), float(rng.uniform(0.0, 0.5)))
        ball = EuclideanBall(rng.uniform(-0.5, 0.5, size=m), float(rng.uniform(0.5, 2.0)))
        bound = f.subgradient_bound(ball)
        for _ in range(4):
            x = ball.project(rng.uniform(-3, 3, size=m))
            y = ball.project(rng.uniform(-3, 3, size=m))
            d = f.subgrad(x)
            if f.value(y) - f.value(x) < (y - x) @ d - 1e-9:
                failures += 1
            if np.linalg.norm(d) > bound + 1e-9:
                failures += 1
    report("9b", failures == 0,
           f"subgradient inequality and norm bound: {CASES} samples, {failures} failures")


def _random_step_case(rng):
    n = int(rng.integers(2, 6))
    m = int(rng.integers(1, 4))
    q = rng.uniform(-1.5, 1.5, size=(n, m))
    sigma = float(rng.uniform(0.0, 0.3))
    ens = lasso_ensemble(q, sigma, float(rng.uniform(0.8, 2.0)))
    a = random_stochastic(rng, n, floor=0.05)
    states = ens.constraint.project(rng.uniform(-2, 2, size=(n, m)))
    return ens, a, states


def test_criterion_9c_per_step_iterate_inequality():
    rng = np.random.Generator(np.random.Philox(key=903))
    checked = 0
    failures = 0
    while checked < CASES:
        ens, a, x = _random_step_case(rng)
        z = ens.constraint.project(rng.uniform(-2, 2, size=ens.dimension))
        for k in range(25):
            alpha = float(rng.uniform(0.0, 1.0)) * (k + 1) ** -0.6
            x_next = step(x, a, ens, alpha)
            slack = verify_iterate_inequality(x, x_next, a, ens, alpha, z)
            failures += int(np.min(slack) < -1e-9)
            checked += x.shape[0]
            x = x_next
    report("9c", failures == 0,
           f"per-step iterate inequality: {checked} agent-step checks, {failures} failures")


def test_criterion_9d_disturbance_bound():
    rng = np.random.Generator(np.random.Philox(key=904))
    checked = 0
    failures = 0
    while checked < CASES:
        ens, a, x = _random_step_case(rng)
        for k in range(25):
            alpha = float(rng.uniform(0.0, 1.0)) * (k + 1) ** -0.6
            x_next = step(x, a, ens, alpha)
            margin = disturbance_bound_check(x, x_next, a, alpha, ens.L)
            failures += int(np.min(margin) < 0)
            checked += x.shape[0]
            x = x_next
    report("9d", failures == 0,
           f"disturbance bound |omega| <= alpha L: {checked} agent-step checks, "
           f"{failures} failures")


def test_criterion_9e_spread_contraction():
    rng = np.random.Generator(np.random.Philox(key=905))
    failures = 0
    for _ in range(CASES):
        n = int(rng.integers(2, 9))
        raw = rng.uniform(0.0, 1.0, size=(n, n)) + 1e-12
        p = raw / raw.sum(axis=1, keepdims=True)
        mu = rng.uniform(-4, 4, size=n)
        spread = lambda v: float(v.max() - v.min())
        if spread(p @ mu) > contraction_coefficient(p) * spread(mu) + 1e-12:
            failures += 1
    report("9e", failures == 0,
           f"averaging spread contraction: {CASES} random (P, mu) cases, {failures} failures")


def _split_ring_library(rng, n, B, eta):
    """B matrices that partition a directed ring; jointly connected windows."""
    mats = [np.eye(n) for _ in range(B)]
    for i in range(n):
        owner = int(rng.integers(0, B))
        w = float(rng.uniform(eta, 0.5))
        mats[owner][(i + 1) % n, (i + 1) % n] = 1.0 - w
        mats[owner][(i + 1) % n, i] = w
    return [validate_weight_matrix(m, eta) for m in mats]


def _dense_floor_library(rng, n, B, eta):
    """B dense matrices whose every entry stays at or above eta."""
    out = []
    for _ in range(B):
        slack = rng.dirichlet(np.ones(n), size=n)
        out.append(validate_weight_matrix(eta + (1.0 - n * eta) * slack, eta))
    return out


def test_criterion_9f_window_product_floor():
    rng = np.random.Generator(np.random.Philox(key=906))
    checked = 0
    failures = 0
    while checked < CASES:
        n = int(rng.integers(2, 6))
        B = int(rng.integers(1, 4))
        eta = float(rng.uniform(0.05, min(0.45, 0.9 / n)))
        if rng.uniform() < 0.5:
            library = _dense_floor_library(rng, n, B, eta)
        else:
            library = _split_ring_library(rng, n, B, eta)
        sched = periodic_schedule(library)
        span = (n - 1) * B
        if not is_ujsc(sched, window=B, horizon=span + B):
            continue
        s = int(rng.integers(0, B))
        mats = [sched.matrix_at(s + t) for t in range(span)]
        floor = eta ** span
        prod = transition_product(mats, start=s)
        if prod.matrix.min() < floor - 1e-12:
            failures += 1
        checked += prod.matrix.size
    report("9f", failures == 0,
           f"transition-product entry floor eta^((n-1)B): {checked} entries checked, "
           f"{failures} failures")


def test_criterion_10_trace_determinism(scenario_cache):
    one = scenario_cache("paper-lasso")
    two = run_scenario(get_scenario("paper-lasso"))
    csv_one = format_trace_csv(one.trace)
    csv_two = format_trace_csv(two.trace)
    ok = csv_one == csv_two
    report(10, ok,
           f"paper-lasso twice with the same seed: CSV traces "
           f"{'bit-identical' if ok else 'differ'} "
           f"({len(csv_one)} bytes, {one.trace.length} rows)")
