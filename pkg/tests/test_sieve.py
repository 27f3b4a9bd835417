import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from bvforms.arith import factorize, is_prime, mobius, primes_up_to
from bvforms.errors import AdmissibilityError, ConfigError, CostGuardError
from bvforms.forms import QuadForm
from bvforms.idealarith import FieldContext, SplitType, split_type
from bvforms.lattice import count_lattice, pi_Q
from bvforms.optimizer import maximize_Mk
from bvforms.sieve import (
    S1_S2_sums,
    ShiftTuple,
    SieveConfig,
    SmoothCutoff,
    brute_S,
    common_factor_ok,
    estimate_delta_Q,
    g_omega_over_nu,
    g_omega_over_square,
    g_reciprocal,
    is_admissible,
    lambda_weight,
    lemma1_check,
    omega_bruteforce,
    omega_roots,
    select_W_residues,
    sieve_sum_asymptotic,
    weight_tuples,
)

X2Y2 = QuadForm(1, 0, 1)
FORMS = [X2Y2, QuadForm(1, 1, 2), QuadForm(1, 0, 5), QuadForm(2, 1, 3)]


def linear_cutoff(t):
    t = np.asarray(t, dtype=float)
    return np.maximum(1 - t.sum(axis=-1), 0.0) * np.all(t >= 0, axis=-1)


def cutoff(k, d):
    return SmoothCutoff(maximize_Mk(k, d).polynomial)


def test_shift_tuple():
    s = ShiftTuple.parse("0,0; 0,2;1,5")
    assert s.k == 3 and s.diameter == 5 and str(s) == "0,0;0,2;1,5"
    with pytest.raises(ValueError):
        ShiftTuple(((0, 0), (0, 0)))


def test_admissibility_examples():
    ok = is_admissible(ShiftTuple.vertical([0, 2]), X2Y2)
    assert ok.admissible and ok.witnesses[2] == (1, 0)
    bad = is_admissible(ShiftTuple.vertical([0, 1]), X2Y2)
    assert not bad.admissible and bad.blocking_prime == 2
    for Q in FORMS:
        assert is_admissible(ShiftTuple.vertical([0]), Q).admissible


def test_witnesses_are_valid():
    Q = QuadForm(2, 1, 3)
    s = ShiftTuple.parse("0,0;0,6;6,0;6,6")
    rep = is_admissible(s, Q)
    assert rep.admissible
    for p, (m, n) in rep.witnesses.items():
        assert all(Q(m + g, n + h) % p for g, h in s.shifts)


def test_omega_examples():
    assert omega_roots(5, X2Y2) == 9
    assert omega_roots(3, X2Y2) == 1
    assert omega_roots(1, X2Y2) == 1
    with pytest.raises(ValueError):
        omega_roots(12, X2Y2)


@pytest.mark.parametrize("Q", FORMS, ids=str)
def test_omega_multiplicative_against_brute_force(Q):
    sq = [d for d in range(1, 200) if mobius(d) != 0]
    for d1 in sq:
        for d2 in sq:
            if d1 * d2 <= 1000 and math.gcd(d1, d2) == 1 and d1 <= d2:
                assert omega_roots(d1 * d2, Q) == omega_roots(d1, Q) * omega_roots(d2, Q)
    for d in sq:
        if d <= 120:
            assert omega_roots(d, Q) == omega_bruteforce(d, Q)


@pytest.mark.parametrize("Q", FORMS, ids=str)
def test_omega_matches_split_type(Q):
    ctx = FieldContext.from_form(Q)
    expected = {SplitType.SPLIT: lambda p: 2 * p - 1, SplitType.INERT: lambda p: 1, SplitType.RAMIFIED: lambda p: p}
    for p in primes_up_to(2000):
        p = int(p)
        if (Q.a * Q.delta) % p:
            assert omega_roots(p, Q) == expected[split_type(p, ctx)](p)


def test_lambda_weight_examples():
    F = cutoff(2, 2)
    assert lambda_weight((1, 1), F, 100) == pytest.approx(float(F(np.zeros(2))))
    assert lambda_weight((4, 1), F, 100) == 0
    got = lambda_weight((2, 3), linear_cutoff, 10)
    assert got == pytest.approx(1 - math.log(6) / math.log(10))
    assert lambda_weight((2, 3), linear_cutoff, 5) == 0


@given(st.integers(1, 60), st.integers(1, 60), st.floats(2, 500))
def test_lambda_support(d1, d2, R):
    F = cutoff(2, 1)
    if d1 * d2 > R:
        assert lambda_weight((d1, d2), F, R) == 0


def test_weight_tuples_match_pointwise():
    F = cutoff(2, 2)
    D, lam = weight_tuples(2, 50, F, W=6)
    assert all(math.gcd(int(d), 6) == 1 for d in D.ravel())
    for d, w in zip(D, lam):
        assert w == pytest.approx(lambda_weight(tuple(int(x) for x in d), F, 50))
    listed = {tuple(int(x) for x in d) for d in D}
    for d1 in range(1, 51):
        for d2 in range(1, 51):
            if math.gcd(d1 * d2, 6) == 1 and lambda_weight((d1, d2), F, 50) != 0:
                assert (d1, d2) in listed


def _S1_oracle(g, F, R, k, ell=None):
    """Plain nested loops with math.lcm; independent of the gcd factorisation trick."""
    import itertools

    tuples = [
        d
        for d in itertools.product(range(1, int(R) + 1), repeat=k)
        if math.prod(d) <= R and (ell is None or d[ell] == 1)
    ]
    tuples = [(d, lambda_weight(d, F, R)) for d in tuples]
    tuples = [(d, w) for d, w in tuples if w != 0]
    total = 0.0
    for d, wd in tuples:
        for e, we in tuples:
            if any(math.gcd(d[i], e[j]) != 1 for i in range(k) for j in range(k) if i != j):
                continue
            total += wd * we * math.prod(g(math.lcm(a, b)) for a, b in zip(d, e))
    return total


def test_S1_hand_example():
    F = SmoothCutoff(maximize_Mk(1, 0).polynomial)  # F(t) = 1 - t
    lam2 = -(1 - math.log(2) / math.log(3))
    hand = 1 + 2 * lam2 * 0.5 + lam2 * lam2 * 0.5  # g(2) = g(lcm(2, 2)) = 1/2
    assert S1_S2_sums(g_reciprocal(), F, 3, 1) == pytest.approx(hand, rel=1e-12)


def test_S1_below_two_is_single_term():
    F = cutoff(2, 1)
    assert S1_S2_sums(g_omega_over_square(X2Y2), F, 1.9, 2) == pytest.approx(float(F(np.zeros(2))) ** 2)


@pytest.mark.parametrize("k,R", [(2, 40), (3, 25)])
def test_S1_S2_against_loop_oracle(k, R):
    Q = QuadForm(1, 1, 2)
    F = cutoff(k, 2)
    g1, g2 = g_omega_over_square(Q), g_omega_over_nu(Q)
    assert S1_S2_sums(g1, F, R, k) == pytest.approx(_S1_oracle(g1, F, R, k), rel=1e-10)
    assert S1_S2_sums(g2, F, R, k, ell=0) == pytest.approx(_S1_oracle(g2, F, R, k, ell=0), rel=1e-10)


def test_S1_cost_guard():
    F = cutoff(2, 1)
    with pytest.raises(CostGuardError):
        S1_S2_sums(g_omega_over_square(X2Y2), F, 2 * 10**4, 2)
    F3 = cutoff(3, 1)
    with pytest.raises(CostGuardError):
        S1_S2_sums(g_omega_over_square(X2Y2), F3, 301, 3)


def test_asymptotic_formula():
    F = cutoff(2, 1)
    W = 30
    a = sieve_sum_asymptotic(F, 100, 2, W)
    assert a == pytest.approx((30 / 8) ** 2 * F.I_value() / math.log(100) ** 2)
    b = sieve_sum_asymptotic(F, 100, 2, W, ell=0)
    assert b == pytest.approx((30 / 8) ** 2 * F.J_value() / math.log(100))


def test_select_W_residues():
    s = ShiftTuple.vertical([0, 2])
    assert select_W_residues(X2Y2, s, 2) == (2, 1, 0)
    assert select_W_residues(X2Y2, s, 1.5) == (1, 0, 0)
    W, r1, r2 = select_W_residues(X2Y2, s, 7)
    assert W == 210 and all(math.gcd(X2Y2(r1 + g, r2 + h), W) == 1 for g, h in s.shifts)
    with pytest.raises(AdmissibilityError) as exc:
        select_W_residues(X2Y2, ShiftTuple.vertical([0, 1]), 2)
    assert exc.value.prime == 2 and "p=2" in str(exc.value)


def _config(**kw):
    base = dict(form=X2Y2, shifts=ShiftTuple.vertical([0, 2]), X=2000.0, D0=2, rho=1.0, R=20.0)
    base.update(kw)
    return SieveConfig(**base)


def test_brute_S_zero_cutoff():
    cfg = _config(rho=0.0)
    res = brute_S(X2Y2, cfg.shifts, cfg, lambda t: np.zeros(np.shape(t)[:-1]))
    assert res.S == 0


def test_brute_S_k1_reduces_to_lattice_counts():
    Q = QuadForm(1, 1, 2)
    X = 5000.0
    cfg = SieveConfig(Q, ShiftTuple.vertical([0]), X, D0=0, rho=0.7, R=1.5)
    res = brute_S(Q, cfg.shifts, cfg, cutoff(1, 0))
    primes = pi_Q(Q, 2 * X) - pi_Q(Q, X)
    points = count_lattice(Q, 2 * X) - count_lattice(Q, X)
    assert res.prime_weighted == primes and res.weight_total == points
    assert res.S == pytest.approx(primes - 0.7 * points)


def test_brute_S_against_pointwise_oracle():
    Q = X2Y2
    cfg = _config(X=600.0, R=12.0)
    F = cutoff(2, 2)
    res = brute_S(Q, cfg.shifts, cfg, F)
    W, r1, r2 = res.W, *res.residues
    main = tot = 0.0
    B = 40
    for m in range(-B, B + 1):
        for n in range(-B, B + 1):
            if not (600 < Q(m, n) <= 1200) or (m - r1) % W or (n - r2) % W:
                continue
            vals = [Q(m + g, n + h) for g, h in cfg.shifts.shifts]
            L = 0.0
            for d1 in range(1, 13):
                for d2 in range(1, 13):
                    if vals[0] % d1 == 0 and vals[1] % d2 == 0:
                        L += lambda_weight((d1, d2), F, 12.0)
            chi = sum(is_prime(v) for v in vals)
            main += chi * L * L
            tot += L * L
    assert res.prime_weighted == pytest.approx(main, rel=1e-12)
    assert res.weight_total == pytest.approx(tot, rel=1e-12)


@given(st.floats(0, 5))
def test_brute_S_affine_in_rho(rho):
    F = cutoff(2, 1)
    base = brute_S(X2Y2, _config().shifts, _config(rho=0.0), F)
    res = brute_S(X2Y2, _config().shifts, _config(rho=rho), F)
    assert base.weight_total >= 0
    assert res.S == base.S - rho * base.weight_total


def test_brute_S_cost_guard():
    cfg = _config(X=1e9)
    with pytest.raises(CostGuardError):
        brute_S(X2Y2, cfg.shifts, cfg, cutoff(2, 1))


def test_lemma1_counterexample_at_a_split_prime():
    # 5 | Q(2, 4) = 20 and 5 | Q(2, 6) = 40, but a Q(0, 2) Q(0, -2) = 16
    assert X2Y2(2, 4) % 5 == 0 and X2Y2(2, 6) % 5 == 0 and 16 % 5 != 0
    rep = lemma1_check(X2Y2, 0, 2, trials=2000, seed=3)
    assert rep.bound_product == 16 and rep.violation_count > 0
    assert all(5 in bad or bad for _, _, _, bad in rep.violations)
    for m, n, G, bad in rep.violations:
        assert math.gcd(X2Y2(m, n), X2Y2(m, n + 2)) == G
        assert all(16 % p for p in bad)


@given(
    st.sampled_from(FORMS),
    st.integers(-10**4, 10**4),
    st.integers(-10**4, 10**4),
    st.integers(-30, 30),
    st.integers(-30, 30),
    st.sampled_from([int(p) for p in primes_up_to(60)]),
)
def test_lemma1_holds_when_both_points_give_the_same_root(Q, m, n, g, h, p):
    """The argument goes through when m/n = (m+g)/(n+h) mod p: then p | Q(g, h)."""
    assume((g, h) != (0, 0) and Q.a % p and n % p and (n + h) % p)
    # move (m, n) onto a common root by solving m = r n for a root r of Q(x, 1)
    roots = [r for r in range(p) if Q(r, 1) % p == 0]
    assume(roots)
    r = roots[0]
    m = r * n + p * m
    # (m + g)/(n + h) = r forces g = r h mod p
    g = r * h + p * g
    assert Q(m, n) % p == 0 and Q(m + g, n + h) % p == 0
    assert Q(g, h) % p == 0


def test_w_trick_shared_primes_outside_small_W():
    """With W built from primes <= 7 the shifted values can still share a split prime > 7."""
    s = ShiftTuple.vertical([0, 2])
    W, r1, r2 = select_W_residues(X2Y2, s, 7)
    m = r1 + W * np.arange(-300, 301)
    n = r2 + W * np.arange(-300, 301)[:, None]
    mm, nn = np.broadcast_arrays(m[None, :], n)
    ok = common_factor_ok(X2Y2, s, mm.ravel(), nn.ravel())
    assert not ok.all()


def test_estimate_delta_Q():
    est = estimate_delta_Q(X2Y2, (10**4, 10**5))
    assert [x for x, _ in est.trace] == [1e4, 1e5]
    x, val = est.trace[-1]
    assert val == pytest.approx(pi_Q(X2Y2, 1e5) * 1 * math.log(1e5) / 1e5)
    assert 3.5 < est.estimate < 5.0


def test_sieve_config_from_file(tmp_path):
    p = tmp_path / "s.cfg"
    p.write_text("form = 1,0,1\nshifts = 0,0;0,2\nX = 1e4\ntheta = 0.5\ndelta = 0.01\n# comment\nD0 = 5\n")
    cfg = SieveConfig.from_file(p)
    assert cfg.k == 2 and cfg.D0 == 5 and cfg.R_value == pytest.approx(1e4**0.24)
    p.write_text("form = 1,0,1\nshifts = 0,0\nX = 1e4\nbogus = 1\n")
    with pytest.raises(ConfigError):
        SieveConfig.from_file(p)
    p.write_text("form = 1,0,1\nshifts = 0,0\nX = 10\ntheta = 0\n")
    with pytest.raises(ConfigError):
        SieveConfig.from_file(p)
