"""Acceptance criteria, one test each, at the stated tolerances.

Run ``pytest tests/test_acceptance.py -v`` (a PASS/FAIL line per criterion is
printed in the terminal summary) or ``python tests/test_acceptance.py``.
"""

import json
import math
import random
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acceptance_log import RESULTS, criterion  # noqa: E402

from bvforms.arith import legendre_euler, primes_up_to  # noqa: E402
from bvforms.cli import run  # noqa: E402
from bvforms.forms import QuadForm, class_number  # noqa: E402
from bvforms.idealarith import FieldContext, SplitType, dirichlet_class_number, nu, nu_bruteforce, nu_prime, split_type  # noqa: E402
from bvforms.lattice import bv_discrepancy_sum, expected_points, pi_Q, residue_count_table  # noqa: E402
from bvforms.optimizer import maximize_Mk  # noqa: E402
from bvforms.rayclass import centered, congruence_criterion, embed, rayclass_equiv_oracle  # noqa: E402
from bvforms.sieve import (  # noqa: E402
    S1_S2_sums,
    ShiftTuple,
    g_omega_over_square,
    is_admissible,
    lemma1_check,
    select_W_residues,
    sieve_sum_asymptotic,
)
from bvforms.simplex import SmoothCutoff  # noqa: E402

REDUCED = {7: (1, 1, 2), 11: (1, 1, 3), 15: (1, 1, 4), 19: (1, 1, 5), 20: (1, 0, 5), 23: (1, 1, 6)}
LATTICE_FORMS = [QuadForm(1, 0, 1), QuadForm(1, 1, 2), QuadForm(1, 0, 5), QuadForm(2, 1, 3)]


def _split_by_euler(delta, p):
    if p == 2:
        r = (-delta) % 8
        return SplitType.RAMIFIED if r % 2 == 0 else (SplitType.SPLIT if r == 1 else SplitType.INERT)
    s = legendre_euler(-delta, p)
    return {1: SplitType.SPLIT, -1: SplitType.INERT, 0: SplitType.RAMIFIED}[s]


def _zero_count(Q, p):
    """#{(u, v) mod p : p | Q(u, v)} via homogeneity: v = 0 row plus (p - 1) copies of the v = 1 row."""
    u = np.arange(p, dtype=np.int64)
    row0 = int(np.count_nonzero((Q.a * u * u) % p == 0))
    row1 = int(np.count_nonzero((Q.a * u * u + Q.b * u + Q.c) % p == 0))
    return row0 + (p - 1) * row1


@criterion(1, "nu identity for q <= 500 and prime values for p <= 1e4")
def test_criterion_01_nu_identity():
    t0 = time.perf_counter()
    for delta, abc in REDUCED.items():
        Q = QuadForm(*abc)
        ctx = FieldContext.from_delta(delta)
        bad = [q for q in range(1, 501) if nu(q, ctx) != nu_bruteforce(q, Q)]
        assert not bad, f"Delta={delta}: mismatch at q={bad[:5]}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 60, f"identity sweep took {elapsed:.1f}s"
    formula = {SplitType.SPLIT: lambda p: (p - 1) ** 2, SplitType.INERT: lambda p: p * p - 1, SplitType.RAMIFIED: lambda p: p * p - p}
    for delta, abc in REDUCED.items():
        Q = QuadForm(*abc)
        ctx = FieldContext.from_delta(delta)
        for p in primes_up_to(10**4):
            p = int(p)
            t = _split_by_euler(delta, p)
            assert split_type(p, ctx) is t
            assert nu_prime(p, ctx) == formula[t](p) == p * p - _zero_count(Q, p)
    return f"identity sweep {elapsed:.1f}s"


@criterion(2, "norm identity N(embed) = a Q(m, n)")
def test_criterion_02_norm_identity():
    rng = random.Random(2024)
    forms = [QuadForm(1, 1, 2), QuadForm(1, 0, 5), QuadForm(2, 1, 3), QuadForm(1, 0, 1), QuadForm(3, 2, 5)]
    for Q in forms:
        fails = 0
        for _ in range(10**4):
            m, n = rng.randint(-10**9, 10**9), rng.randint(-10**9, 10**9)
            fails += embed(Q, m, n).norm() != Q.a * Q(m, n)
        assert fails == 0, f"{Q}: {fails} failures"


@criterion(3, "congruence criterion <=> ray class oracle witness")
def test_criterion_03_rayclass_equivalence():
    t0 = time.perf_counter()
    pairs = mismatches = 0
    for Q in (QuadForm(1, 1, 2), QuadForm(1, 0, 5)):
        for q in (3, 5, 7, 11):
            reps = [
                (centered(u, q), centered(v, q)) for u in range(q) for v in range(q) if math.gcd(Q(u, v), q) == 1
            ]
            for mn in reps:
                for uv in reps:
                    B = 4 * q * max(1, *map(abs, mn + uv))
                    found = rayclass_equiv_oracle(Q, q, mn, uv, B).found
                    mismatches += congruence_criterion(Q, q, mn, uv) != found
                    pairs += 1
    elapsed = time.perf_counter() - t0
    assert mismatches == 0, f"{mismatches} mismatches"
    assert elapsed < 300, f"took {elapsed:.0f}s"
    return f"{pairs} pairs"


@criterion(4, "class numbers with Dirichlet oracle")
def test_criterion_04_class_numbers():
    expected = {7: 1, 11: 1, 15: 2, 20: 2, 23: 3}
    for delta, h in expected.items():
        assert class_number(delta).h == h
        assert round(dirichlet_class_number(delta)) == h
        assert abs(dirichlet_class_number(delta) - h) < 0.05


@criterion(5, "lattice law within 5% for X = 1e6, q <= 20")
def test_criterion_05_lattice_law():
    worst = 0.0
    for Q in LATTICE_FORMS:
        area = expected_points(Q, 1e6)
        for q in range(1, 21):
            table = residue_count_table(Q, 1e6, q)
            expected = area / (q * q)
            dev = float(np.max(np.abs(table - expected)) / expected)
            worst = max(worst, dev)
            assert dev <= 0.05, f"{Q} q={q}: relative deviation {dev:.4f}"
    return f"worst relative deviation {worst:.4f}"


@criterion(6, "pi(100, x^2 + y^2) = 92")
def test_criterion_06_pi_100():
    assert pi_Q(QuadForm(1, 0, 1), 100) == 92


@criterion(7, "D(x, 0.25) (log x)^2 / x non-increasing over three decades")
def test_criterion_07_bv_decay():
    t0 = time.perf_counter()
    out = []
    for Q in (QuadForm(1, 0, 1), QuadForm(1, 1, 2)):
        vals = [bv_discrepancy_sum(Q, x, 0.25).normalized for x in (1e4, 1e5, 1e6)]
        out.append(f"{Q}: " + ", ".join(f"{v:.4f}" for v in vals))
        assert vals[0] >= vals[1] >= vals[2], f"{Q}: {vals}"
    assert time.perf_counter() - t0 < 1800
    return "; ".join(out)


@pytest.mark.xfail(
    strict=True,
    reason="the divisibility claim fails at split primes where m/n and (m+g)/(n+h) are distinct roots of Q(x,1)",
)
@criterion(8, "common-factor lemma: zero violations in 1e5 trials per form")
def test_criterion_08_common_factor():
    cases = [(QuadForm(1, 0, 1), 0, 2), (QuadForm(1, 1, 2), 0, 2), (QuadForm(1, 0, 5), 1, 1), (QuadForm(2, 1, 3), 1, 2)]
    counts = []
    for Q, g, h in cases:
        rep = lemma1_check(Q, g, h, trials=10**5, seed=0)
        counts.append((str(Q), rep.violation_count, rep.violations[:1]))
    assert all(c == 0 for _, c, _ in counts), f"violations: {counts}"


@criterion(9, "S1 brute / asymptotic in [0.5, 2] at R=1e3 and closer to 1 at R=1e4")
def test_criterion_09_sieve_sums():
    F = SmoothCutoff(maximize_Mk(2, 1).polynomial)
    s = ShiftTuple.vertical([0, 2])
    out = []
    for Q in (QuadForm(1, 0, 1), QuadForm(1, 1, 2)):
        W, _, _ = select_W_residues(Q, s, 7)
        g = g_omega_over_square(Q)
        r3 = S1_S2_sums(g, F, 1e3, 2, W) / sieve_sum_asymptotic(F, 1e3, 2, W)
        r4 = S1_S2_sums(g, F, 1e4, 2, W) / sieve_sum_asymptotic(F, 1e4, 2, W)
        out.append(f"{Q}: W={W} {r3:.4f} -> {r4:.4f}")
        assert 0.5 <= r3 <= 2.0, out[-1]
        assert abs(r4 - 1) < abs(r3 - 1), out[-1]
    return "; ".join(out)


@criterion(10, "optimizer: M1, M2 >= 1.38, monotone in d_max, first-order optimality")
def test_criterion_10_optimizer():
    from fractions import Fraction

    from test_optimizer import m2_triangle_oracle

    for d in range(0, 6):
        assert abs(maximize_Mk(1, d).Mk - 1) <= 1e-9
    oracle = m2_triangle_oracle(40)
    m2 = maximize_Mk(2, 3)
    assert m2.Mk >= 1.38 and oracle >= 1.38
    for k in (2, 3, 4, 5):
        vals = [maximize_Mk(k, d).Mk for d in range(0, 6)]
        assert all(b >= a for a, b in zip(vals, vals[1:])), f"k={k}: {vals}"
    rng = np.random.default_rng(10)
    for k, d in [(2, 3), (3, 3), (4, 4), (5, 3)]:
        res = maximize_Mk(k, d)
        assert res.residual <= 1e-8 * res.eigenvalue
        c = np.array(res.coeffs)
        for _ in range(5):
            v = rng.standard_normal(c.size)
            v /= np.linalg.norm(v)
            q = float(res.functional.quotient_exact([Fraction(float(x)) for x in c + 1e-4 * v]))
            assert q <= res.Mk + 1e-8
    return f"M2(d=3)={m2.Mk:.6f}, grid oracle={oracle:.6f}"


@criterion(11, "admissibility of {(0,0),(0,2)} and blocking of {(0,0),(0,1)} at p=2")
def test_criterion_11_admissibility(tmp_path=None):
    Q = QuadForm(1, 0, 1)
    ok = is_admissible(ShiftTuple.vertical([0, 2]), Q).as_dict()
    bad = is_admissible(ShiftTuple.vertical([0, 1]), Q).as_dict()
    assert ok["admissible"] and ok["witnesses"]["2"] == [1, 0]
    assert not bad["admissible"] and bad["blocking_prime"] == 2
    # exhaustive mod-2 scan
    assert [(m, n) for n in range(2) for m in range(2) if (m * m + n * n) % 2 and (m * m + (n + 2) ** 2) % 2][0] == (1, 0)
    assert not any((m * m + n * n) * (m * m + (n + 1) ** 2) % 2 for m in range(2) for n in range(2))


@criterion(12, "gap pipeline on x^2 + y^2 emits a finite c(Q) with certificate")
def test_criterion_12_gap(tmp_path):
    code = run(["gap", "--form", "1,0,1", "--theta", str(0.5 - 1e-3), "--delta", "1e-3", "--outdir", str(tmp_path)])
    assert code == 0
    res = json.loads((tmp_path / "gap.json").read_text())["result"]
    assert res["found"] and isinstance(res["cQ"], int) and res["cQ"] > 0
    assert res["threshold"] > 1 and res["Mk_coeffs"] and res["deltaQ_trace"]
    assert res["witnesses"]["admissible"] and res["tuple"][0] == 0 and res["tuple"][-1] == res["cQ"]
    # the comparison with 246 is only logged
    return f"k={res['k']}, Mk={res['Mk']:.4f}, threshold={res['threshold']:.4f}, c(Q)={res['cQ']} (246 for reference)"


COMMANDS = [
    ["validate", "--form", "1,1,2"],
    ["nu", "--form", "1,1,2", "--q-max", "40"],
    ["classnum", "--form", "2,1,3"],
    ["count", "--form", "1,0,1", "--X", "1e5", "--modulus", "4"],
    ["bv", "--form", "1,0,1", "--X", "1e4", "--theta", "0.4", "--exact-q-max", "20", "--samples", "16", "--threads", "2"],
    ["sieve-brute", "--form", "1,0,1", "--X", "3000", "--R", "50", "--D0", "3"],
    ["mk", "--kmax", "4", "--dmax", "3"],
    ["gap", "--form", "1,0,1", "--theta", "0.499", "--delta", "0.001", "--kmax", "25"],
]


@criterion(13, "determinism: identical config and seed give byte-identical artifacts")
def test_criterion_13_determinism(tmp_path):
    for cmd in COMMANDS:
        dirs = []
        for run_id in ("a", "b"):
            d = tmp_path / run_id / cmd[0]
            assert run(cmd + ["--seed", "7", "--emit-plot-data", "--outdir", str(d)]) == 0
            dirs.append(d)
        names = sorted(p.name for p in dirs[0].iterdir())
        assert names == sorted(p.name for p in dirs[1].iterdir())
        for name in names:
            assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes(), f"{cmd[0]}: {name} differs"
    return f"{len(COMMANDS)} subcommands"


if __name__ == "__main__":
    import tempfile

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    for fn in tests:
        try:
            if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as d:
                    fn(Path(d))
            else:
                fn()
        except BaseException:
            pass
    print()
    for n in sorted(RESULTS):
        print(RESULTS[n])
