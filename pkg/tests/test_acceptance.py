"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (lines are collected and printed in the terminal summary)
or directly with ``python tests/test_acceptance.py``.
"""

import math
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from harmlab import (PHI, PSI, Grid, Interval, LLogL, Power, a1_constant, apply_kernel_operator, commutator,
                     cz_decompose, hilbert_kernel, lp_norm, luxemburg_norm, rao_ren_norm,
                     rubio_de_francia)
from harmlab.czlab import kolmogorov_check, kolmogorov_constant
from harmlab.families import default_family, delta_family, resolution_family
from harmlab.orlicz import PHI_PSI, ComplementaryPair, generalized_holder
from harmlab.singular import commutator_kernel_form
from harmlab.verify import DEFAULT_SUITE, fit_growth_exponent, run_verification
from harmlab.weights import RdFConfig, maximal_operator_norm, maximal_power_weight, verify_reverse_holder

# pinned tolerances
SOLVER_TOL = 1e-9
DUAL_TOL = 1e-12
EXACT_BUDGET_S = 120.0
REFINE_TOL = 0.25
T_BAND = (0.8, 1.2)
COMM_BAND = (1.5, 2.1)
MIN_GAP = 0.5
HILBERT_TOL = 0.05
N = 1024

RESULTS = []


def record(label, ok, detail, tag=None):
    line = f"{tag or ('PASS' if ok else 'FAIL')}  {label}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def random_function(rng, g):
    n = g.cells
    kind = rng.integers(4)
    if kind == 0:
        v = rng.exponential(size=n) * (rng.random(n) < rng.uniform(0.01, 0.5))
    elif kind == 1:
        v = rng.normal(size=n) * rng.uniform(0.1, 10)
    elif kind == 2:
        a = rng.integers(n)
        v = np.zeros(n)
        v[a:a + rng.integers(1, n // 4)] = rng.uniform(0.5, 5)
    else:
        v = rng.pareto(1.5, size=n)
    if not np.any(v):
        v[rng.integers(n)] = 1.0
    return g.function(v)


def random_interval(rng, g):
    k = int(rng.integers(1, g.cells + 1))
    return Interval(int(rng.integers(0, g.cells - k + 1)), k)


# -- criterion 1: exact identities and inequalities ---------------------------

def exact_rao_ren(rng, g, cases=1000):
    worst_lo, worst_hi = math.inf, 0.0
    for _ in range(cases):
        B = [PHI, PSI, Power(2.0), LLogL(2.0)][rng.integers(4)]
        f, Q = random_function(rng, g), random_interval(rng, g)
        lux = luxemburg_norm(f, B, Q)
        if lux == 0:
            continue
        r = rao_ren_norm(f, B, Q) / lux
        worst_lo, worst_hi = min(worst_lo, r), max(worst_hi, r)
    ok = worst_lo >= 1 - SOLVER_TOL and worst_hi <= 2 + SOLVER_TOL
    return ok, f"rao-ren/luxemburg in [{worst_lo:.6f}, {worst_hi:.16g}] over {cases} cases"


def exact_holder(rng, g, cases=1000):
    pairs = [PHI_PSI, ComplementaryPair.exact(PHI), ComplementaryPair.exact(Power(3.0))]
    worst = 0.0
    for k in range(cases):
        # exact complements are slow to evaluate, so they get short intervals and a tenth of the cases
        pair = pairs[0] if k % 10 else pairs[1 + (k // 10) % 2]
        Q = random_interval(rng, g) if pair is pairs[0] else random_interval(rng, Grid.on(0, 1, 64))
        f, h = random_function(rng, g), random_function(rng, g)
        lhs, rhs = generalized_holder(f, h, pair, Q)
        if rhs > 0:
            worst = max(worst, lhs / rhs)
    return worst <= 1 + SOLVER_TOL, f"max lhs/rhs {worst:.6f} over {cases} (f, g) pairs"


def exact_reverse_holder(rng, g, count=50):
    worst = 0.0
    for _ in range(count):
        f = random_function(rng, g)
        w = maximal_power_weight(f, float(rng.uniform(0.05, 0.95)))
        ok, ratio = verify_reverse_holder(w, tol=SOLVER_TOL)
        if not ok:
            return False, f"ratio {ratio:.6f} > 1"
        worst = max(worst, ratio)
    return True, f"max M_(r_w) w / (2 [w]_A1 w) = {worst:.4f} on {count} weights"


def exact_rubio_de_francia(rng, g, count=100, s=2.0):
    worst_norm, worst_a1 = 0.0, 0.0
    below = True
    m = maximal_operator_norm(s)
    for _ in range(count):
        h = abs(random_function(rng, g))
        Rh = rubio_de_francia(h, RdFConfig(s=s)).function
        below &= bool(np.all(Rh.values >= h.values))
        worst_norm = max(worst_norm, lp_norm(Rh, s) / lp_norm(h, s))
        worst_a1 = max(worst_a1, a1_constant(Rh) / (s / (s - 1)))
    ok = below and worst_norm <= 2 + SOLVER_TOL and worst_a1 * (s / (s - 1)) <= 2 * m * (1 + SOLVER_TOL)
    return ok, (f"(i) h <= Rh: {below}; (ii) max ||Rh||/||h|| = {worst_norm:.4f} <= 2; "
                f"measured [Rh]_A1/s' = {worst_a1:.4f}")


def exact_cz(rng, g, count=500):
    for _ in range(count):
        f = random_function(rng, g)
        a = np.abs(f.values)
        lam = a.mean() * rng.uniform(1.0, 50.0)
        cz = cz_decompose(f, lam)
        if not cz_invariants_hold(f, lam, cz):
            return False, f"invariant broken at lam={lam:g}"
    return True, f"all invariants on {count} random decompositions"


def cz_invariants_hold(f, lam, cz):
    a = np.abs(f.values)
    seen = np.zeros(a.size, dtype=int)
    for Q, avg in zip(cz.cubes, cz.averages):
        seen[Q.start:Q.stop] += 1
        if not lam < avg <= 2 * lam * (1 + 1e-12):
            return False
        if Q.count < a.size and a[Q.parent().start:Q.parent().stop].mean() > lam:
            return False
    omega = seen > 0
    return bool(seen.max(initial=0) <= 1
                and np.allclose(cz.good.values + cz.bad().values, f.values, rtol=0, atol=1e-12 * (1 + a.max()))
                and np.all(np.abs(cz.good.values) <= 2 * lam * (1 + 1e-12))
                and np.all(a[~omega] <= lam)
                and all(abs(h.values.sum()) <= 1e-10 * (1 + np.abs(h.values).sum()) for h in cz.bad_parts)
                and omega.sum() * f.grid.spacing <= a.sum() * f.grid.spacing / lam * (1 + 1e-12))


def exact_kolmogorov(rng, g, count=500, p=0.5, q=1.0):
    c = kolmogorov_constant(p, q)
    worst = 0.0
    for _ in range(count):
        lhs, rhs = kolmogorov_check(random_function(rng, g), random_interval(rng, g), p, q)
        if rhs > 0:
            worst = max(worst, lhs / rhs)
    # 1/x sampled at right cell edges: weak norm 1, L^(1/2) quasinorm close to 4
    lhs, rhs = kolmogorov_check(g.function(1 / g.edges()[1:]), None, p, q)
    ext = lhs / rhs
    ok = worst <= c * (1 + SOLVER_TOL) and ext <= c * (1 + SOLVER_TOL)
    return ok, (f"constant {c:g}: random max {worst:.4f}, 1/x {ext:.4f}; "
                f"a factor 2 {'holds' if max(worst, ext) <= 2 else 'does not hold'} in general")


def exact_dual_identity():
    g = Grid.on(-1, 1, N)
    b = g.function(np.log(np.maximum(np.abs(g.midpoints()), g.spacing)))
    f = g.indicator(0, 0.5)
    K = hilbert_kernel()
    diff = float(np.max(np.abs(commutator(b, K, f).values - commutator_kernel_form(b, K, f).values)))
    return diff <= DUAL_TOL, f"max |b Tf - T(bf) - sum (b_i - b_j) K f_j h| = {diff:.3g}"


def criterion_1():
    rng = np.random.default_rng(2024)
    g = Grid.on(0, 1, N)
    t0 = time.perf_counter()
    parts = [
        ("Rao-Ren sandwich", exact_rao_ren(rng, g)),
        ("generalized Hoelder", exact_holder(rng, g)),
        ("reverse Hoelder", exact_reverse_holder(rng, g)),
        ("Rubio de Francia", exact_rubio_de_francia(rng, g)),
        ("CZ invariants", exact_cz(rng, g)),
        ("Kolmogorov", exact_kolmogorov(rng, g)),
        ("commutator dual identity", exact_dual_identity()),
    ]
    elapsed = time.perf_counter() - t0
    for name, (ok, detail) in parts:
        record(f"1. {name}", ok, detail)
    timed = record("1. exact suite runtime", elapsed <= EXACT_BUDGET_S, f"{elapsed:.1f} s <= {EXACT_BUDGET_S:g} s")
    return all(ok for _, (ok, _) in parts) and timed


# -- criterion 2: uniform constants under refinement -------------------------

def criterion_2():
    t0 = time.perf_counter()
    coarse = {sid: run_verification(sid, default_family(N)).max_ratio for sid in DEFAULT_SUITE}
    fine = {sid: run_verification(sid, default_family(2 * N)).max_ratio for sid in DEFAULT_SUITE}
    worst_sid, worst = None, 0.0
    finite = True
    for sid in DEFAULT_SUITE:
        finite &= math.isfinite(coarse[sid]) and math.isfinite(fine[sid])
        change = abs(fine[sid] - coarse[sid]) / coarse[sid] if coarse[sid] > 0 else 0.0
        if change > worst:
            worst_sid, worst = sid, change
    elapsed = time.perf_counter() - t0
    ok = finite and worst < REFINE_TOL
    return record("2. default suite N=1024 -> 2048", ok,
                  f"{len(DEFAULT_SUITE)} specs finite={finite}, largest change {100 * worst:.1f}% "
                  f"({worst_sid}: {coarse[worst_sid]:.4f} -> {fine[worst_sid]:.4f}), {elapsed:.0f} s")


# -- criteria 3 and 4: sharpness scans ----------------------------------------

def criterion_3():
    fam = resolution_family()
    ok = True
    for p in (2.0, 1.5, 3.0):
        t = fit_growth_exponent("T-linear", fam, "a1", p)
        c = fit_growth_exponent("Comm-strong-A1", fam, "a1", p)
        gap = c.exponent - t.exponent
        good = (T_BAND[0] <= t.exponent <= T_BAND[1] and COMM_BAND[0] <= c.exponent <= COMM_BAND[1]
                and gap >= MIN_GAP)
        # p = 2 is the pre-registered point; the others are reported
        if p == 2.0:
            ok = good
        record(f"3. sharpness scan p={p:g}{'' if p == 2.0 else ' (report)'}", good,
               f"T {t.exponent:.3f} in {T_BAND}, [b,T] {c.exponent:.3f} in {COMM_BAND}, gap {gap:.3f} >= {MIN_GAP}"
               f" (cells {fam.values[0]}..{fam.values[-1]})")
    # reported only: at fixed N the truncation caps [w]_A1 while the support of f shrinks with delta
    dfam = delta_family()
    t = fit_growth_exponent("T-linear", dfam)
    c = fit_growth_exponent("Comm-strong-A1", dfam)
    record("3. delta sweep at N=4096 (report)", True,
           f"T {t.exponent:.3f} (r2 {t.r2:.2f}), [b,T] {c.exponent:.3f} (r2 {c.r2:.2f}); not asserted", tag="INFO")
    return ok


def criterion_4():
    fam = resolution_family()
    t = fit_growth_exponent("T-endpoint", fam)
    c = fit_growth_exponent("Comm-weak-endpoint", fam)
    finite = all(math.isfinite(pt["ratio"]) for pt in t.points + c.points)
    ok = finite and c.exponent > t.exponent
    return record("4. endpoint ordering", ok,
                  f"weak-type growth in [w]_A1: [b,T] {c.exponent:.3f} > T {t.exponent:.3f}, finite={finite}")


# -- criterion 5: Hilbert transform accuracy ---------------------------------

def criterion_5():
    g = Grid.on(-0.5, 1.5, 4096)
    x = g.midpoints()
    Tf = apply_kernel_operator(hilbert_kernel(), g.indicator(0, 1)).values
    exact = np.log(np.abs(x / (x - 1))) / math.pi
    away = (np.abs(x) > 4 * g.spacing) & (np.abs(x - 1) > 4 * g.spacing)
    err = float(np.max(np.abs(Tf[away] - exact[away]) / np.abs(exact[away])))
    return record("5. Hilbert transform of an indicator, N=4096", err <= HILBERT_TOL,
                  f"max relative error {100 * err:.3f}% <= {100 * HILBERT_TOL:g}% at distance > 4h")


# -- criterion 6: CLI determinism ---------------------------------------------

def criterion_6():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        (tmp / "verify.ini").write_text(f"[grid]\ncells = {N}\n[family]\nseed = 42\n")
        (tmp / "scan.ini").write_text("[scan]\nspecs = T-linear, Comm-strong-A1\n")
        outputs = []
        for run in (1, 2):
            for cmd, cfg in (("verify", "verify.ini"), ("scan", "scan.ini")):
                out = tmp / f"{cmd}{run}.csv"
                proc = subprocess.run([sys.executable, "-m", "harmlab.cli", cmd, str(tmp / cfg),
                                       "--output", str(out)], capture_output=True, text=True)
                if proc.returncode != 0:
                    return record("6. CLI determinism", False, f"{cmd} exited {proc.returncode}: {proc.stderr.strip()}")
                outputs.append(out.read_bytes())
        same = outputs[0] == outputs[2] and outputs[1] == outputs[3]
        return record("6. CLI determinism", same,
                      f"report.csv ({len(outputs[0])} bytes) and scan.csv ({len(outputs[1])} bytes) "
                      f"byte-identical across two runs: {same}")


# -- pytest entry points -------------------------------------------------------

def test_criterion_1_exact_inequalities():
    assert criterion_1()


def test_criterion_2_refinement_stability():
    assert criterion_2()


def test_criterion_3_sharpness_bands():
    assert criterion_3()


def test_criterion_4_endpoint_ordering():
    assert criterion_4()


def test_criterion_5_hilbert_accuracy():
    assert criterion_5()


def test_criterion_6_cli_determinism():
    assert criterion_6()


if __name__ == "__main__":
    results = [criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5(), criterion_6()]
    sys.exit(0 if all(results) else 1)
