"""End-to-end acceptance checks, one test per criterion.

Each test prints (and records for the terminal summary) a single line
``criterion K: PASS|FAIL - detail``.  Run on its own with

    pytest tests/test_acceptance.py -v
"""

import io
import math
import time
from fractions import Fraction

import numpy as np

from ppacert import dual_certificate as dc
from ppacert.dual_certificate import (
    PsdPath,
    assemble_m,
    closed_form_entries,
    construct_certificate,
    verify_certificate,
    zeta,
)
from ppacert.pep_builder import build_instance, export_sdpa
from ppacert.ppa_core import (
    LinearMonotone,
    Trajectory,
    normalize,
    performance_ratio,
    ppa_run,
    resolvent,
    rotation_for,
)
from ppacert.rational_linalg import PSD, psd_certify
from ppacert.pep_builder import constraint_values
from ppacert.worst_case import build_gram, certify_optimal_rate

N_MAX = 100


def record(lines, k, failures, detail):
    status = "PASS" if not failures else "FAIL"
    text = detail if not failures else f"{len(failures)} failure(s), first: {failures[0]}"
    line = f"criterion {k}: {status} - {text}"
    print(line)
    lines.append(line)
    assert not failures, line


def test_criterion_1_exact_tightness(acceptance):
    failures = []
    start = time.perf_counter()
    for n in range(1, N_MAX + 1):
        res = certify_optimal_rate(n)
        expected = Fraction(n**n, (n + 1) ** (n + 1))
        if not (res.zeta == expected == res.primal.achieved == res.dual.eta):
            failures.append(f"N={n}: zeta={res.zeta}")
    elapsed = time.perf_counter() - start
    if elapsed >= 60:
        failures.append(f"took {elapsed:.1f}s")
    record(acceptance, 1, failures, f"zero gap and zeta(N) exact for N=1..{N_MAX} in {elapsed:.1f}s")


def test_criterion_2_dual_certificate(acceptance):
    failures = []
    for n in range(1, N_MAX + 1):
        m = assemble_m(construct_certificate(n), build_instance(n))
        if psd_certify(m) != PSD(n):
            failures.append(f"N={n}: LDL^T gave {psd_certify(m)}")
    dc._cache.clear()
    for n in range(4, 61):
        try:
            v = verify_certificate(n)
        except dc.CertificateError as exc:
            failures.append(f"N={n}: {exc}")
            continue
        if v.psd_path is not PsdPath.APPENDIX_RECURSION or v.eta != zeta(n):
            failures.append(f"N={n}: path {v.psd_path}, eta {v.eta}")
    record(acceptance, 2, failures, f"M PSD (rank N) for N=1..{N_MAX}; recursion windows, pivots, M^[2]=0 for N=4..60")


def test_criterion_3_closed_form(acceptance):
    failures = [
        f"N={n}"
        for n in range(2, 61)
        if closed_form_entries(n) != assemble_m(construct_certificate(n), build_instance(n))
    ]
    record(acceptance, 3, failures, "closed-form entries equal assembled M for N=2..60")


def test_criterion_4_worst_case_equalities(acceptance):
    failures = []
    for n in range(1, N_MAX + 1):
        g = build_gram(n).gram
        vals = constraint_values(build_instance(n), g)
        nonzero = [k for k, v in vals.a_vals.items() if v != 0] + [i for i, v in enumerate(vals.b_vals, 1) if v != 0]
        if nonzero:
            failures.append(f"N={n}: nonzero at {nonzero[:3]}")
        if psd_certify(g) != PSD(2):
            failures.append(f"N={n}: gram gives {psd_certify(g)}")
    record(acceptance, 4, failures, f"all A, B products vanish and gram is PSD rank 2 for N=1..{N_MAX}")


def test_criterion_5_known_bound(acceptance):
    failures = []
    scaled = [zeta(n) * (n + 1) for n in range(1, N_MAX + 1)]
    for n in range(1, N_MAX + 1):
        if not zeta(n) < Fraction(1, n + 1):
            failures.append(f"N={n}: zeta >= 1/(N+1)")
    for n, (a, b) in enumerate(zip(scaled, scaled[1:]), start=1):
        if not (a > b and float(b) > 1 / math.e):
            failures.append(f"N={n}: ratio not decreasing above 1/e")
    exact = Fraction(100, 101) ** 100
    if scaled[-1] != exact or abs(float(exact) - (100 / 101) ** 100) > 1e-12:
        failures.append(f"zeta(100)*101 = {float(scaled[-1])!r}")
    record(
        acceptance,
        5,
        failures,
        f"zeta < 1/(N+1), (N+1)zeta decreasing from 1/2 to {float(scaled[-1]):.15f} > 1/e",
    )


def test_criterion_6_simulation(acceptance):
    failures = []
    worst = 0.0
    for n in range(1, 51):
        t = ppa_run(rotation_for(n), [1.0, 0.0], 1.0, n + 1)
        err = abs(performance_ratio(t, [0.0, 0.0]) - float(zeta(n)))
        worst = max(worst, err)
        if err > 1e-9:
            failures.append(f"N={n}: error {err:.3g}")
    w1 = ppa_run(rotation_for(5), [10.0, 0.0], 1.0, 6).points[1]
    if np.max(np.abs(w1 - [8.333333, 3.726780])) > 1e-6:
        failures.append(f"figure point w^1 = {w1}")
    record(acceptance, 6, failures, f"max |ratio - zeta| = {worst:.2e} for N<=50; w^1 = ({w1[0]:.6f}, {w1[1]:.6f})")


def test_criterion_7_property_suite(acceptance):
    rng = np.random.default_rng(20201016)
    failures = []
    cases = 240
    worst_norm = 0.0
    for case in range(cases):
        dim = int(rng.integers(1, 7))
        n = int(rng.integers(1, 21))
        lam = float(np.exp(rng.uniform(np.log(0.05), np.log(20.0))))
        b = rng.standard_normal((dim, dim))
        k = rng.standard_normal((dim, dim))
        s = rng.uniform(0, 2) * b @ b.T / dim + rng.uniform(0, 3) * (k - k.T)
        if case % 10 == 0:
            s = k - k.T  # pure skew, the extremal class
        op = LinearMonotone(s)
        w0 = rng.standard_normal(dim)
        t = ppa_run(op, w0, lam, n + 1)
        res = t.residual_norms
        if any(y > x + 1e-12 for x, y in zip(res, res[1:])):
            failures.append(f"case {case}: residuals increase")
        ratio = performance_ratio(t, np.zeros(dim))
        if ratio > 1 / (n + 1) + 1e-9:
            failures.append(f"case {case}: ratio {ratio} > 1/(N+1)")
        # Fact 1: lambda absorbed into the operator, A(lam .) with unit step from w0/lam
        rebuilt = ppa_run(LinearMonotone(lam * s), w0 / lam, 1.0, n + 1)
        # Fact 2: for linear A the conjugate (1/g) A (g .) is A itself, started from w0/g
        gamma = float(rng.uniform(0.1, 10.0))
        conj = ppa_run(op, w0 / gamma, lam, n + 1)
        # Fact 3: A(. - c) has zero c and resolvent z -> J(z - c) + c
        c = rng.standard_normal(dim)
        pts = [w0 + c]
        for _ in range(n + 1):
            pts.append(resolvent(op, lam, pts[-1] - c) + c)
        shifted = Trajectory(lam, pts, [float(np.linalg.norm(x - y)) for x, y in zip(pts, pts[1:])])
        for other, zero in ((normalize(t, np.zeros(dim)), np.zeros(dim)), (rebuilt, np.zeros(dim)),
                            (conj, np.zeros(dim)), (normalize(shifted, c), np.zeros(dim)), (shifted, c)):
            diff = abs(performance_ratio(other, zero) - ratio)
            worst_norm = max(worst_norm, diff)
            if diff > 1e-12:
                failures.append(f"case {case}: normalized ratio differs by {diff:.3g}")
    record(
        acceptance,
        7,
        failures,
        f"{cases} random operators: residuals monotone, ratio <= 1/(N+1); max normalization drift {worst_norm:.1e}",
    )


def test_criterion_8_sdpa_roundtrip(acceptance):
    failures = []
    for n in (1, 5, 20):
        inst = build_instance(n)
        buf = io.StringIO()
        export_sdpa(inst, buf)
        mats = _independent_parse(buf.getvalue())
        expected = [m for _, m in inst.constraints()] + [inst.e11, -inst.e11]
        for k, m in enumerate(expected, start=1):
            got = {(i - 1, j - 1): v for (i, j), v in mats.get((k, 1), {}).items()}
            if got != dict(m.items()):
                failures.append(f"N={n}: constraint {k}")
        obj = {(i - 1, j - 1): v for (i, j), v in mats[(0, 1)].items()}
        if obj != dict(inst.c_mat.items()):
            failures.append(f"N={n}: objective")
    record(acceptance, 8, failures, "export/re-parse reproduces every constraint entry for N in {1, 5, 20}")


def _independent_parse(text):
    body = [ln.split() for ln in text.splitlines() if ln.strip() and ln[0] not in '"*']
    mats = {}
    for k, blk, i, j, v in body[4:]:
        mats.setdefault((int(k), int(blk)), {})[(int(i), int(j))] = Fraction(v)
    return mats
