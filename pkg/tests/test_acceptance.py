"""Acceptance suite: one test per criterion, each reported as a PASS/FAIL line.

The two end-to-end benchmarks take roughly a quarter of an hour on a
single core; select the fast criteria alone with ``-m "not slow"``.
"""

from __future__ import annotations

import itertools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from srmobo import acquisition as acq
from srmobo import cli, cmaes, driver, gp
from srmobo.benchmarks import BenchmarkSpec, evaluate, true_front
from srmobo.cmaes import CmaesConfig
from srmobo.constraints import KnownConstraintSet, LinearConstraint
from srmobo.gp import FitConfig, GpModel, KernelKind, KernelSpec
from srmobo.metrics import default_reference, hypervolume, hypervolume_2d, igd
from srmobo.pareto import extract_front
from srmobo.scalarize import Method, ScalarizationSpec, scalarize

DATA = Path(__file__).parent / "data"
STUB = [sys.executable, str(DATA / "stub_evaluator.py")]


def detail(request, text: str) -> None:
    request.node.criterion_detail = text


# ---------------------------------------------------------------- oracles


def oracle_kernel(kind, amp, ls, xa, xb):
    r = np.sqrt((((xa[:, None, :] - xb[None, :, :]) / ls) ** 2).sum(axis=-1))
    if kind is KernelKind.MATERN12:
        p = np.exp(-r)
    elif kind is KernelKind.MATERN32:
        p = (1 + math.sqrt(3) * r) * np.exp(-math.sqrt(3) * r)
    elif kind is KernelKind.MATERN52:
        p = (1 + math.sqrt(5) * r + 5 * r**2 / 3) * np.exp(-math.sqrt(5) * r)
    else:
        p = np.exp(-0.5 * r**2)
    return amp**2 * p


def dense_inverse_posterior(model: GpModel, xq):
    k = model.kernel
    x = model.train_inputs
    kxx = oracle_kernel(k.kind, k.amplitude, k.lengthscales, x, x) + model.noise_variance * np.eye(len(x))
    kinv = np.linalg.inv(kxx)
    kq = oracle_kernel(k.kind, k.amplitude, k.lengthscales, xq, x)
    resid = model.train_targets - model.prior_mean
    mean = model.prior_mean + kq @ kinv @ resid
    var = k.amplitude**2 - np.einsum("ij,jk,ik->i", kq, kinv, kq)
    _, logdet = np.linalg.slogdet(kxx)
    lml = -0.5 * resid @ kinv @ resid - 0.5 * logdet - 0.5 * len(x) * math.log(2 * math.pi)
    return mean, var, lml


def brute_force_labels(y):
    # j dominates i when y_j <= y_i everywhere and < somewhere
    le = np.all(y[:, None, :] <= y[None, :, :], axis=-1)
    lt = np.any(y[:, None, :] < y[None, :, :], axis=-1)
    dominated = np.any(le & lt, axis=0)
    return (~dominated).astype(int)


def inclusion_exclusion(points, ref):
    total = 0.0
    for k in range(1, len(points) + 1):
        for subset in itertools.combinations(points, k):
            corner = np.max(np.array(subset), axis=0)
            total += (-1) ** (k + 1) * float(np.prod(np.maximum(ref - corner, 0.0)))
    return total


def monte_carlo_hv(points, ref, n, rng):
    lo = points.min(axis=0)
    samples = lo + (ref - lo) * rng.random((n, points.shape[1]))
    hit = np.zeros(n, dtype=bool)
    for p in points:
        hit |= np.all(samples >= p, axis=1)
    return float(np.prod(ref - lo)) * hit.mean()


def random_front(rng, n, s):
    raw = np.abs(rng.normal(size=(n, s)))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


# ---------------------------------------------------------------- criteria


@pytest.mark.criterion("GP correctness vs dense inverse")
def test_gp_correctness(request):
    rng = np.random.default_rng(11)
    kinds = list(KernelKind)
    worst = 0.0
    start = time.perf_counter()
    for i in range(25):
        kind = kinds[i % len(kinds)]
        n, d = int(rng.integers(1, 21)), int(rng.integers(1, 5))
        spec = KernelSpec(kind, rng.uniform(0.5, 2.0), rng.uniform(0.3, 1.5, d))
        x = rng.random((n, d))
        y = np.sin(3 * x.sum(axis=1)) + 0.1 * rng.standard_normal(n)
        model = GpModel.build(spec, rng.uniform(1e-3, 1e-1), float(rng.normal()), x, y)
        xq = rng.random((10, d))
        mean, var = gp.predict_batch(model, xq)
        lml = gp.log_marginal_likelihood(model)
        o_mean, o_var, o_lml = dense_inverse_posterior(model, xq)
        err = max(np.max(np.abs(mean - o_mean)), np.max(np.abs(var - np.maximum(o_var, 0))), abs(lml - o_lml))
        worst = max(worst, float(err))
    elapsed = time.perf_counter() - start
    detail(request, f"max abs error {worst:.2e}, {elapsed:.2f} s")
    assert worst <= 1e-8
    assert elapsed < 5.0


@pytest.mark.criterion("GP interpolation of 8 sin samples")
def test_gp_interpolation(request):
    x = np.linspace(0, np.pi, 8)[:, None]
    y = np.sin(x[:, 0])
    worst = 0.0
    for kind in KernelKind:
        model = gp.fit(x, y, kind, FitConfig(seed=0))
        mean, _ = gp.predict_batch(model, x)
        worst = max(worst, float(np.max(np.abs(mean - y))))
    detail(request, f"max residual {worst:.2e} over all kernels")
    assert worst <= 1e-6


@pytest.mark.criterion("Scalarization reductions and hand values")
def test_scalarization(request):
    rng = np.random.default_rng(7)
    mismatches = 0
    total = 0
    for _ in range(1000):
        s = int(rng.integers(2, 6))
        w = rng.dirichlet(np.ones(s))
        y = rng.normal(size=(100, s)) * 3
        x = rng.normal(size=(100, int(rng.integers(1, 5))))
        z0 = np.zeros(s)
        reg0 = ScalarizationSpec(Method.REGULARIZED_AUGMENTED_TCHEBYCHEFF, rho=0.65, lam=0.0)
        aug = ScalarizationSpec(Method.AUGMENTED_TCHEBYCHEFF, rho=0.65, ideal_point=z0)
        aug0 = ScalarizationSpec(Method.AUGMENTED_TCHEBYCHEFF, rho=0.0, ideal_point=z0)
        wt = ScalarizationSpec(Method.WEIGHTED_TCHEBYCHEFF, ideal_point=z0)
        mismatches += int(np.sum(scalarize(reg0, w, y, x) != scalarize(aug, w, y)))
        mismatches += int(np.sum(scalarize(aug0, w, y) != scalarize(wt, w, y)))
        total += 100
    no_ridge = scalarize(ScalarizationSpec(rho=0.65, lam=0.0), [0.5, 0.5], [2.0, 4.0], [7.0, -2.0])
    ridge = scalarize(ScalarizationSpec(rho=0.65, lam=0.01), [0.5, 0.5], [2.0, 4.0], [3.0, 4.0])
    detail(request, f"{total} triples, {mismatches} mismatches, hand values {no_ridge!r} / {ridge!r}")
    assert total == 100_000
    assert mismatches == 0
    assert abs(no_ridge - 3.95) <= 1e-12
    assert abs(ridge - 4.00) <= 1e-12


@pytest.mark.criterion("Pareto extraction vs brute force")
def test_pareto_extraction(request):
    rng = np.random.default_rng(3)
    sets = []
    for i in range(100):
        s = 2 + i % 4
        # every other set is integer valued so ties and duplicates occur
        y = rng.integers(0, 6, size=(200, s)).astype(float) if i % 2 else rng.random((200, s))
        sets.append(y)
    start = time.perf_counter()
    labels = [extract_front(y) for y in sets]
    elapsed = time.perf_counter() - start
    wrong = sum(int(not np.array_equal(lab, brute_force_labels(y))) for lab, y in zip(labels, sets))
    detail(request, f"{wrong} mismatching sets, {elapsed:.2f} s")
    assert wrong == 0
    assert elapsed < 10.0


@pytest.mark.criterion("Hypervolume vs sweep, inclusion-exclusion and Monte Carlo")
def test_hypervolume(request):
    rng = np.random.default_rng(5)
    sweep_err = 0.0
    for _ in range(100):
        pts = random_front(rng, int(rng.integers(1, 40)), 2)
        ref = np.array([1.1, 1.1])
        sweep_err = max(sweep_err, abs(hypervolume(pts, ref) - hypervolume_2d(pts, ref)))

    ie_err = 0.0
    for n in range(1, 9):
        for _ in range(5):
            pts = rng.random((n, 3))
            ref = np.ones(3)
            ie_err = max(ie_err, abs(hypervolume(pts, ref) - inclusion_exclusion(pts, ref)))

    mc_err = 0.0
    for _ in range(3):
        pts = random_front(rng, 20, 3)
        ref = np.full(3, 1.1)
        exact = hypervolume(pts, ref)
        mc_err = max(mc_err, abs(monte_carlo_hv(pts, ref, 1_000_000, rng) - exact) / exact)
    detail(request, f"sweep {sweep_err:.1e}, incl-excl {ie_err:.1e}, Monte Carlo rel {mc_err:.2%}")
    assert sweep_err <= 1e-12
    assert ie_err <= 1e-9
    assert mc_err < 0.01


@pytest.mark.criterion("CMA-ES sphere and Rosenbrock")
def test_cmaes(request):
    sphere_box = np.tile([-5.0, 5.0], (10, 1))
    rosen_box = np.tile([-5.0, 5.0], (2, 1))
    sphere_ok = rosen_ok = 0
    for seed in range(5):
        res = cmaes.minimize(lambda x: float(np.sum(x**2)), sphere_box, CmaesConfig(max_evals=20_000, seed=seed))
        sphere_ok += int(res.f_best < 1e-8 and res.evals <= 20_000)
        res = cmaes.minimize(
            lambda x: float(100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2),
            rosen_box,
            CmaesConfig(max_evals=20_000, seed=seed),
        )
        rosen_ok += int(np.linalg.norm(res.x_best - 1.0) < 1e-3 and res.evals <= 20_000)
    detail(request, f"sphere {sphere_ok}/5, Rosenbrock {rosen_ok}/5")
    assert sphere_ok == 5
    assert rosen_ok >= 4


def random_linear_constraints(rng, d, k):
    # every hyperplane passes through one shared interior point, so the
    # feasible region is never empty
    anchor = rng.uniform(0.2, 0.8, d)
    cons = []
    for _ in range(k):
        coef = rng.normal(size=d)
        cons.append(LinearConstraint(coef, float(coef @ anchor)))
    return KnownConstraintSet(tuple(cons))


@pytest.mark.criterion("Known-constraint masking")
def test_constraint_masking(request, monkeypatch):
    rng = np.random.default_rng(9)
    spec = BenchmarkSpec("ZDT1")
    fast = acq.MaximizerConfig(n_probes=256, restarts=1, max_evals=120)
    captured = []
    real = acq.maximize_acquisition

    def spy(fn, *args, **kw):
        captured.append(fn)
        return real(fn, *args, **kw)

    monkeypatch.setattr(acq, "maximize_acquisition", spy)
    queries = violators = nonzero = asks = bad_asks = 0
    for _ in range(10):
        known = random_linear_constraints(rng, spec.d, int(rng.integers(1, 3)))
        cfg = driver.RunConfig(spec.bounds, 2, n_init=5, budget=3, seed=int(rng.integers(1000)),
                               known_constraints=known, fit_starts=2, maximizer=fast)  # fmt: skip
        opt = driver.initialize(cfg, lambda x: evaluate(spec, x))
        for _ in range(3):
            captured.clear()
            x = opt.ask()
            asks += 1
            bad_asks += int(known.indicator(x[None, :])[0] == 0)
            opt.tell(x, evaluate(spec, x))
        composite = captured[-1]
        xq = rng.random((1000, spec.d))
        values = composite(xq)
        mask = known.indicator(xq) == 0
        queries += len(xq)
        violators += int(mask.sum())
        nonzero += int(np.count_nonzero(values[mask]))

    # the bare product with arbitrary factor values, including infinities
    xq = rng.random((10_000, 3))
    known = random_linear_constraints(rng, 3, 2)
    ind = known.indicator(xq)
    post = (rng.normal(size=10_000), rng.exponential(size=10_000))
    for name in acq.VARIANTS[:9]:
        spec_acq = acq.AcquisitionSpec.from_name(name)
        values = acq.composite_acquisition(spec_acq, post, post, rng.random(10_000), ind, 0.0, 0.5, -5.0, -5.0)
        nonzero += int(np.count_nonzero(values[ind == 0]))
    detail(request, f"{queries} driver queries, {violators} violators, {nonzero} nonzero, "
                    f"{bad_asks}/{asks} violating asks")  # fmt: skip
    assert queries == 10_000 and violators > 0
    assert nonzero == 0
    assert bad_asks == 0


@pytest.fixture(scope="module")
def zdt1_runs():
    spec = BenchmarkSpec("ZDT1")
    tf = true_front(spec, 500).points
    out = []
    for seed in range(5):
        cfg = driver.RunConfig(spec.bounds, 2, n_init=5, budget=145, seed=seed,
                               acquisition=acq.AcquisitionSpec.from_name("Reg-UCB-EI"))  # fmt: skip
        start = time.perf_counter()
        res = driver.run(cfg, lambda x: evaluate(spec, x))
        elapsed = time.perf_counter() - start
        rand = driver.random_search(cfg, lambda x: evaluate(spec, x))
        assert len(res.records) == len(rand.records) == 150
        out.append((igd(res.front(), tf), igd(rand.front(), tf), elapsed))
    return out


@pytest.mark.slow
@pytest.mark.criterion("End-to-end ZDT1 vs random search")
def test_zdt1_end_to_end(request, zdt1_runs):
    bo = float(np.median([r[0] for r in zdt1_runs]))
    rand = float(np.median([r[1] for r in zdt1_runs]))
    slowest = max(r[2] for r in zdt1_runs)
    detail(request, f"median IGD {bo:.4g} vs random {rand:.4g}, slowest run {slowest:.0f} s")
    assert bo < rand
    assert slowest < 300


@pytest.fixture(scope="module")
def dtlz2_runs():
    spec = BenchmarkSpec("DTLZ2", d=4, M=3)
    tf = true_front(spec).points
    ref = default_reference(tf)
    out = []
    for seed in range(3):
        cfg = driver.RunConfig(spec.bounds, 3, n_init=5, budget=195, seed=seed)
        res = driver.run(cfg, lambda x: evaluate(spec, x), tf, ref)
        rand = driver.random_search(cfg, lambda x: evaluate(spec, x), tf, ref)
        assert len(res.records) == len(rand.records) == 200
        gd_at = {c.evaluations: c.report.gd for c in res.checkpoints}
        out.append((res.checkpoints[-1].report.hv, rand.checkpoints[-1].report.hv, gd_at[50], gd_at[200]))
    return out


@pytest.mark.slow
@pytest.mark.criterion("End-to-end DTLZ2 vs random search")
def test_dtlz2_end_to_end(request, dtlz2_runs):
    hv_wins = sum(int(bo >= rand) for bo, rand, _, _ in dtlz2_runs)
    gd_drops = sum(int(g200 < g50) for _, _, g50, g200 in dtlz2_runs)
    detail(request, f"HV >= random on {hv_wins}/3 seeds, GD(50) > GD(200) on {gd_drops}/3 seeds")
    assert hv_wins == 3
    assert gd_drops >= 2


@pytest.mark.criterion("Deterministic result CSVs")
def test_determinism(request, tmp_path):
    configs = {
        "zdt": "benchmark: ZDT1\nbudget: 4\nseeds: [0, 7]\nvariants: [Reg-UCB-EI, NoReg-PI-UCB]\nworkers: 1\n",
        "dtlz": "benchmark: DTLZ2\nbudget: 3\nseeds: [1]\nvariants: [Reg-EI-PI]\nworkers: 1\n",
        "external": (
            f"evaluator:\n  command: {STUB + ['halfplane']}\n  bounds: [[0, 1], [0, 1]]\n  n_objectives: 2\n"
            "budget: 3\nseeds: [2]\nworkers: 1\n"
        ),
    }
    compared = 0
    for name, text in configs.items():
        bodies = []
        for rep in ("a", "b"):
            out = tmp_path / f"{name}_{rep}"
            cfg = cli.parse_config(text + f"output_dir: {out}\n")
            assert cli.run_experiment(cfg) == 0
            bodies.append({p.parent.name: p.read_bytes() for p in sorted(out.glob("*/results.csv"))})
        assert bodies[0].keys() == bodies[1].keys() and bodies[0]
        for key in bodies[0]:
            assert bodies[0][key] == bodies[1][key], key
            compared += 1
    detail(request, f"{compared} run CSVs byte-identical")


@pytest.mark.criterion("External evaluator protocol")
def test_protocol(request):
    assert np.array_equal(cli.external_evaluate(STUB + ["feasible"], [0.1, 0.2]), [1.0, 2.0])
    assert cli.external_evaluate(STUB + ["infeasible"], [0.1, 0.2]) is None
    assert cli.external_evaluate(STUB + ["crash"], [0.1, 0.2]) is None
    start = time.perf_counter()
    assert cli.external_evaluate(STUB + ["timeout"], [0.1, 0.2], timeout=1.0) is None
    assert time.perf_counter() - start < 10

    opt = driver.Optimizer(driver.RunConfig([[0, 1], [0, 1]], 2, n_init=4))
    for mode in ("feasible", "infeasible", "crash", "timeout"):
        x = opt.ask()
        opt.tell(x, cli.external_evaluate(STUB + [mode], x, timeout=1.0))
    recs = opt.records
    assert [r.feasible for r in recs] == [True, False, False, False]
    assert recs[0].objectives.tolist() == [1.0, 2.0]
    assert all(r.objectives is None for r in recs[1:])
    detail(request, "feasible, infeasible, crash and timeout records as expected")
