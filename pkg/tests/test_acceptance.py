"""Release gate: ten numbered end-to-end checks.

Each test prints one PASS/FAIL line (written past the capture so it shows up
in plain pytest runs too) and enforces its budgeted runtime where one is
part of the contract.  Random suites are fixed-seed, so failures are
reproducible; check 9 audits every variable reported during check 8.
"""

import itertools
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest
from mpmath import mp, mpf, polyroots

import conftest
from conftest import parity_core
from juntalab import (
    ConstantFunctionError,
    Junta,
    LearnStatus,
    LearnerParams,
    NoCoefficientFoundError,
    Oracle,
    biased_coefficient,
    biased_coefficient_bruteforce,
    biased_spectrum,
    chi,
    chi_cross_coefficient,
    chi_l2_distance,
    degree,
    dense_table,
    density,
    assignments,
    estimate_coefficient,
    estimate_coefficient_unknown_bias,
    find_one_relevant,
    hoeffding_sample_size,
    learn_junta,
    level_weight,
    level_weight_direct,
    poly_derivative,
    expectation_polynomial,
    random_junta,
    relevant_variables_bruteforce,
    root_set,
    russo_rhs,
    sigma,
    squarefree_decomposition,
    theorem1_witness,
)

PAR3_100 = Junta(100, (11, 47, 83), parity_core(3))
AND2_50 = Junta(50, (7, 23), (-1, -1, -1, 1))

# check 8 deposits every report here; check 9 audits them
REPORTED: list[tuple[str, int, tuple[int, ...], frozenset[int]]] = []


def _line(num: int, ok: bool, detail: str) -> None:
    msg = f"CRITERION {num:2d}: {'PASS' if ok else 'FAIL'} ({detail})"
    conftest.CRITERION_LINES.append(msg)
    sys.__stdout__.write(msg + "\n")
    sys.__stdout__.flush()


def _dyadic_biases(rng, count, span=972):
    """Distinct exact multiples of 1/1024, so rational scans stay cheap."""
    ints = rng.choice(np.arange(-span, span + 1), size=count, replace=False)
    return [float(v) / 1024.0 for v in ints]


@pytest.fixture(scope="module")
def suite200():
    rng = np.random.default_rng(20240201)
    out = []
    for _ in range(200):
        k = int(rng.integers(1, 9))
        n = int(rng.integers(k, 13))
        out.append(random_junta(n, k, int(rng.integers(0, 2**31))))
    return out


@pytest.fixture(scope="module")
def suite500():
    rng = np.random.default_rng(20240202)
    out = []
    for _ in range(500):
        k = int(rng.integers(1, 7))
        n = int(rng.integers(k, 11))
        out.append(random_junta(n, k, int(rng.integers(0, 2**31)), require_nonconstant=True))
    return out


def _dense_spectra_rows(table: np.ndarray, rvs: np.ndarray) -> np.ndarray:
    """Measure-weighted butterflies over the full cube, one row per bias
    vector.  Independent of the junta change-of-basis route."""
    n = rvs.shape[1]
    out = np.broadcast_to(table, (rvs.shape[0], table.size)).astype(np.float64).copy()
    sig = np.sqrt((1.0 - rvs) * (1.0 + rvs))
    for b in range(n):
        view = out.reshape(rvs.shape[0], -1, 2, 1 << b)
        lo = view[:, :, 0, :].copy()
        hi = view[:, :, 1, :].copy()
        rb = rvs[:, b][:, None, None]
        s = sig[:, b][:, None, None]
        view[:, :, 0, :] = (1.0 - rb) / 2.0 * lo + (1.0 + rb) / 2.0 * hi
        view[:, :, 1, :] = (1.0 - rb) / 2.0 * ((-1.0 - rb) / s) * lo + (1.0 + rb) / 2.0 * ((1.0 - rb) / s) * hi
    return out


def test_criterion_01_exact_engine_equivalence(suite200):
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    worst_coeff = 0.0
    worst_parseval = 0.0
    for f in suite200:
        rvs = rng.uniform(-0.9, 0.9, size=(100, f.n))
        table = dense_table(f)
        dense = _dense_spectra_rows(table, rvs)
        dmask = np.zeros(1 << f.k, dtype=np.int64)
        for mask in range(1 << f.k):
            dm = 0
            for b in range(f.k):
                if (mask >> b) & 1:
                    dm |= 1 << f.relevant[b]
            dmask[mask] = dm
        specs = np.stack([biased_spectrum(f, rv) for rv in rvs])
        worst_coeff = max(worst_coeff, float(np.abs(specs - dense[:, dmask]).max()))
        worst_parseval = max(worst_parseval, float(np.abs((specs**2).sum(axis=1) - 1.0).max()))
        # spot check against the literal density-weighted inner product
        S = f.relevant[:1]
        bf = biased_coefficient_bruteforce(f, S, rvs[0])
        worst_coeff = max(worst_coeff, abs(biased_coefficient(f, S, rvs[0]) - bf))
    elapsed = time.perf_counter() - t0
    ok = worst_coeff <= 1e-9 and worst_parseval <= 1e-9 and elapsed <= 120.0
    _line(1, ok, f"coeff err {worst_coeff:.2e}, parseval err {worst_parseval:.2e}, {elapsed:.1f}s")
    assert worst_coeff <= 1e-9
    assert worst_parseval <= 1e-9
    assert elapsed <= 120.0


def test_criterion_02_derivative_identity(suite200):
    rng = np.random.default_rng(22)
    worst_res = 0.0
    worst_level = 0.0
    for f in suite200:
        biases = [float(v) / 1024.0 for v in rng.integers(-921, 922, size=50)]
        poly = expectation_polynomial(f)
        for s in range(1, f.k + 1):
            deriv = poly_derivative(poly, s)
            for r in biases:
                lhs = float(deriv(Fraction(r)))
                worst_res = max(worst_res, abs(lhs - russo_rhs(f, s, r)))
                worst_level = max(
                    worst_level, abs(level_weight(f, s, r) - level_weight_direct(f, s, r))
                )
    ok = worst_res <= 1e-9 and worst_level <= 1e-9
    _line(2, ok, f"identity residual {worst_res:.2e}, level-sum gap {worst_level:.2e}")
    assert worst_res <= 1e-9
    assert worst_level <= 1e-9


def test_criterion_03_witness_never_missing(suite500):
    rng = np.random.default_rng(33)
    calls = 0
    failures = []
    for fi, f in enumerate(suite500):
        d = degree(f)
        for s in range(1, d + 1):
            for t in range(1, d + 1):
                if s * t < d:
                    continue
                biases = _dyadic_biases(rng, t)
                calls += 1
                try:
                    w = theorem1_witness(f, s, biases)
                except Exception as exc:  # any miss is a hard failure
                    failures.append((fi, s, t, repr(exc)))
                    continue
                if not set(w.subset) <= set(f.relevant) or w.value == 0:
                    failures.append((fi, s, t, "unsound witness"))
    ok = not failures
    _line(3, ok, f"{calls} witness scans, {len(failures)} failures")
    assert failures == [], failures[:5]


def test_criterion_04_threshold_floor(suite500):
    rng = np.random.default_rng(44)
    checked = 0
    skipped_empty = 0
    violations = []
    sizes_cache: dict[int, np.ndarray] = {}
    for fi, f in enumerate(suite500):
        d = degree(f)
        if f.k not in sizes_cache:
            sizes_cache[f.k] = np.array([m.bit_count() for m in range(1 << f.k)])
        sizes = sizes_cache[f.k]
        biases = _dyadic_biases(rng, 10)
        for s in range(1, d + 1):
            try:
                rs = root_set(f, s)
            except ConstantFunctionError:
                continue
            if not rs.points:
                skipped_empty += 1
                continue
            res = np.array([pt.re for pt in rs.points])
            for r in biases:
                gamma = float(np.abs(res - r).min())
                bound = sigma(r) ** s * (gamma / 4.0) ** f.k
                spec = biased_spectrum(f, r)
                top = float(np.abs(spec[(sizes >= 1) & (sizes <= s)]).max())
                checked += 1
                if top < bound * (1.0 - 1e-9):
                    violations.append((fi, s, r, top, bound))
    ok = not violations
    _line(4, ok, f"{checked} floor checks ({skipped_empty} empty root sets skipped), {len(violations)} violations")
    assert violations == [], violations[:5]


def _factor_roots_mp(q) -> list[float]:
    mp.dps = 40
    coeffs = [mpf(c.numerator) / mpf(c.denominator) for c in reversed(q.coeffs)]
    return [float(z.real) for z in polyroots(coeffs, maxsteps=200, extraprec=60)]


def test_criterion_05_root_sets(suite500):
    par3 = Junta(3, (0, 1, 2), parity_core(3))
    and2 = Junta(5, (0, 2), (-1, -1, -1, 1))
    rs = root_set(par3, 1)
    frozen_ok = (
        len(rs.points) == 1
        and abs(rs.points[0].re) <= 1e-8
        and rs.points[0].multiplicity == 2
        and root_set(and2, 1).points == ()
    )

    worst = 0.0
    missed = 0
    card_bad = 0
    for f in suite500:
        d = degree(f)
        h = poly_derivative(expectation_polynomial(f), 1)
        if h.is_zero():
            continue
        factors = squarefree_decomposition(h)
        for s in range(1, d + 1):
            rs = root_set(f, s)
            if len(rs.points) > (d - 1) // s:
                card_bad += 1
            exact = []
            for mult, q in factors:
                if mult >= s:
                    exact.extend(_factor_roots_mp(q))
            for pt in rs.points:
                gap = min((abs(pt.re - e) for e in exact), default=math.inf)
                worst = max(worst, gap)
            for e in exact:
                if -1.0 + 1e-6 < e < 1.0 - 1e-6:
                    gap = min((abs(pt.re - e) for pt in rs.points), default=math.inf)
                    if gap > 1e-6:
                        missed += 1
    ok = frozen_ok and worst <= 1e-8 and missed == 0 and card_bad == 0
    _line(
        5,
        ok,
        f"frozen cases {'ok' if frozen_ok else 'BAD'}, worst root gap {worst:.2e}, "
        f"missed roots {missed}, cardinality violations {card_bad}",
    )
    assert frozen_ok
    assert worst <= 1e-8
    assert missed == 0
    assert card_bad == 0


def test_criterion_06_estimator_calibration():
    t0 = time.perf_counter()
    rng = np.random.default_rng(66)
    trials = 200
    n = 6
    summary = []
    all_ok = True

    def draw_target(size):
        k = int(rng.integers(max(size, 1), 6))
        f = random_junta(n, k, int(rng.integers(0, 2**31)), require_nonconstant=True)
        r = float(rng.uniform(-0.58, 0.58))
        S = tuple(sorted(int(i) for i in rng.choice(f.relevant, size=size, replace=False)))
        return f, r, S

    for size in (1, 2):
        for eps in (0.05, 0.1):
            for delta in (0.05, 0.1):
                fails = 0
                for trial in range(trials):
                    f, r, S = draw_target(size)
                    m = hoeffding_sample_size(size, sigma(r), eps, delta)
                    batch = Oracle(f, r, master_seed=(size, trial)).draw_batch(m)
                    got = estimate_coefficient(batch, S, r)
                    if abs(got - biased_coefficient(f, S, r)) > eps:
                        fails += 1
                cell_ok = fails <= delta * trials
                all_ok = all_ok and cell_ok
                summary.append(f"|S|={size} eps={eps} delta={delta}: {fails}/{trials}")
                assert cell_ok, summary[-1]

    # unknown-bias path, matched accuracy targets, its own budget formulas
    for size in (1, 2):
        for eps, delta in ((0.05, 0.05), (0.1, 0.1)):
            fails = 0
            for trial in range(trials):
                f, r, S = draw_target(size)
                oracle = Oracle(f, r, master_seed=(7, size, trial))
                got = estimate_coefficient_unknown_bias(oracle, S, 0.4, eps, delta)
                if abs(got - biased_coefficient(f, S, r)) > eps:
                    fails += 1
            cell_ok = fails <= delta * trials
            all_ok = all_ok and cell_ok
            summary.append(f"unknown |S|={size} eps={eps}: {fails}/{trials}")
            assert cell_ok, summary[-1]

    elapsed = time.perf_counter() - t0
    all_ok = all_ok and elapsed <= 300.0
    _line(6, all_ok, "; ".join(summary) + f"; {elapsed:.1f}s")
    assert elapsed <= 300.0


def test_criterion_07_character_geometry():
    rng = np.random.default_rng(77)
    # exact L2 distance against its closed-form ceiling
    l2_bad = 0
    for _ in range(100):
        n = int(rng.integers(1, 9))
        size = int(rng.integers(0, min(4, n) + 1))
        S = tuple(sorted(int(i) for i in rng.choice(n, size=size, replace=False)))
        r = float(rng.uniform(-0.8, 0.8))
        rp = float(np.clip(r + rng.uniform(-0.2, 0.2), -0.95, 0.95))
        alpha = 1.0 - max(abs(r), abs(rp))
        bound = (size + 1) * abs(r - rp) / (math.sqrt(alpha) * sigma(rp) ** size)
        if chi_l2_distance(S, r, rp, n) > bound + 1e-12:
            l2_bad += 1

    # expansion coefficients against literal inner products
    cross_worst = 0.0
    for n in (3, 5, 8):
        rv = rng.uniform(-0.8, 0.8, size=n)
        rpv = rng.uniform(-0.8, 0.8, size=n)
        xs = assignments(n)
        masses = np.array([density(rv, x) for x in xs])
        S = tuple(sorted(int(i) for i in rng.choice(n, size=min(3, n), replace=False)))
        for sz in range(len(S) + 1):
            for T in itertools.combinations(S, sz):
                want = math.fsum(m * chi(S, x, rpv) * chi(T, x, rv) for m, x in zip(masses, xs))
                cross_worst = max(
                    cross_worst, abs(chi_cross_coefficient(S, T, rv, rpv) - want)
                )

    # scalar facts used by the perturbation argument
    fact_bad = 0
    grid = np.linspace(0.0, 1.0, 41)
    for s in range(1, 7):
        for a in grid:
            for b in grid:
                if abs(a**s - b**s) > s * abs(a - b) + 1e-12:
                    fact_bad += 1
    rgrid = np.linspace(-0.9, 0.9, 37)
    for r in rgrid:
        for rp in rgrid:
            if abs(sigma(rp) - sigma(r)) > abs(rp - r) / sigma(r) + 1e-12:
                fact_bad += 1

    ok = l2_bad == 0 and cross_worst <= 1e-10 and fact_bad == 0
    _line(7, ok, f"L2 violations {l2_bad}, cross err {cross_worst:.2e}, fact violations {fact_bad}")
    assert l2_bad == 0
    assert cross_worst <= 1e-10
    assert fact_bad == 0


def test_criterion_08_end_to_end_learning():
    par_params = LearnerParams(
        k=3, s=1, alpha=0.5, gamma=0.5, delta=0.1, threshold=0.05, samples_per_coeff=50_000
    )
    true_par = relevant_variables_bruteforce(PAR3_100)
    true_and = relevant_variables_bruteforce(AND2_50)

    t0 = time.perf_counter()
    wins_a = 0
    for seed in range(20):
        oracles = [
            Oracle(PAR3_100, r, master_seed=seed, oracle_id=j)
            for j, r in enumerate((-0.5, 0.0, 0.5))
        ]
        report = learn_junta(oracles, par_params)
        REPORTED.append(("8a", seed, report.relevant, true_par))
        if report.status is LearnStatus.EXACT_SUCCESS and report.table == parity_core(3):
            wins_a += 1
    elapsed_a = time.perf_counter() - t0

    misses_b = 0
    single_params = LearnerParams(
        k=3, s=1, alpha=1.0, gamma=0.5, delta=0.1, threshold=0.05, samples_per_coeff=50_000
    )
    for seed in range(20):
        oracle = Oracle(PAR3_100, 0.0, master_seed=seed)
        try:
            idx = find_one_relevant([oracle], single_params)
        except NoCoefficientFoundError:
            misses_b += 1
        else:
            REPORTED.append(("8b", seed, (idx,), true_par))

    and_params = LearnerParams(
        k=2, s=1, alpha=0.7, gamma=0.5, delta=0.1, threshold=0.05, samples_per_coeff=50_000
    )
    wins_c = 0
    for seed in range(20):
        oracles = [
            Oracle(AND2_50, r, master_seed=seed, oracle_id=j)
            for j, r in enumerate((-0.3, 0.3))
        ]
        report = learn_junta(oracles, and_params)
        REPORTED.append(("8c", seed, report.relevant, true_and))
        if report.status is LearnStatus.EXACT_SUCCESS and report.table == (-1, -1, -1, 1):
            wins_c += 1

    blind_params = LearnerParams(
        k=3, s=1, alpha=0.5, gamma=0.5, delta=0.1, threshold=0.05,
        samples_per_coeff=50_000, unknown_biases=True,
    )
    wins_d = 0
    for seed in range(20):
        oracles = [
            Oracle(PAR3_100, r, master_seed=seed, oracle_id=j)
            for j, r in enumerate((-0.5, 0.0, 0.5))
        ]
        report = learn_junta(oracles, blind_params)
        REPORTED.append(("8d", seed, report.relevant, true_par))
        if report.status is LearnStatus.EXACT_SUCCESS and report.table == parity_core(3):
            wins_d += 1

    ok = wins_a >= 18 and elapsed_a <= 60.0 and misses_b >= 18 and wins_c >= 18 and wins_d >= 17
    _line(
        8,
        ok,
        f"(a) {wins_a}/20 in {elapsed_a:.1f}s, (b) {misses_b}/20 correctly blind, "
        f"(c) {wins_c}/20, (d) {wins_d}/20",
    )
    assert wins_a >= 18
    assert elapsed_a <= 60.0
    assert misses_b >= 18
    assert wins_c >= 18
    assert wins_d >= 17


def test_criterion_09_soundness_audit():
    assert REPORTED, "no learning runs were collected"
    bad = [
        (case, seed, vars_)
        for case, seed, vars_, truth in REPORTED
        if not set(vars_) <= truth
    ]
    ok = not bad
    _line(9, ok, f"{len(REPORTED)} reports audited, {len(bad)} with foreign variables")
    assert bad == [], bad


def test_criterion_10_scan_scaling():
    params = LearnerParams(
        k=3, s=2, alpha=1.0, gamma=0.5, delta=0.1, threshold=0.5, samples_per_coeff=20_000
    )

    def one_run(n, seed):
        f = Junta(n, (2, 5, 8), parity_core(3))
        oracle = Oracle(f, 0.0, master_seed=seed)
        t0 = time.perf_counter()
        with pytest.raises(NoCoefficientFoundError):
            find_one_relevant([oracle], params)
        return time.perf_counter() - t0

    one_run(20, 99)  # warmup
    med = {}
    for n in (20, 40, 80):
        med[n] = sorted(one_run(n, seed) for seed in range(3))[1]
    r1 = med[40] / med[20]
    r2 = med[80] / med[40]
    ok = 2.0 <= r1 <= 6.0 and 2.0 <= r2 <= 6.0
    _line(
        10,
        ok,
        f"median scan times {med[20]:.3f}/{med[40]:.3f}/{med[80]:.3f}s, "
        f"doubling ratios {r1:.2f} and {r2:.2f}",
    )
    assert 2.0 <= r1 <= 6.0
    assert 2.0 <= r2 <= 6.0
