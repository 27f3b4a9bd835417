"""Sieve layer for prime pairs Q(m + g, n + h): admissibility, weights, sums.

The root-counting function (number of (a, b) mod d with d | Q(a, b)) is
called ``omega`` here, keeping ``rho`` for the scalar threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arith import (
    crt,
    factorize,
    is_prime_array,
    mobius,
    primes_up_to,
    radical_divides,
    smallest_prime_factor,
)
from .errors import AdmissibilityError, ConfigError, CostGuardError
from .forms import QuadForm, class_number
from .idealarith import FieldContext, nu_prime
from .lattice import expected_points, iter_points, pi_Q
from .simplex import SmoothCutoff

PAIR_BUDGET = 5 * 10**7
R_LIMITS = {1: 10**6, 2: 10**4, 3: 300}


@dataclass(frozen=True)
class ShiftTuple:
    shifts: tuple[tuple[int, int], ...]

    def __post_init__(self):
        s = tuple((int(g), int(h)) for g, h in self.shifts)
        if not s:
            raise ValueError("empty shift tuple")
        if len(set(s)) != len(s):
            raise ValueError(f"shifts must be distinct: {s}")
        object.__setattr__(self, "shifts", s)

    @classmethod
    def parse(cls, text: str) -> "ShiftTuple":
        """Parse ``"g1,h1;g2,h2;..."``."""
        pairs = []
        for chunk in str(text).split(";"):
            if chunk.strip():
                g, h = (int(v) for v in chunk.split(","))
                pairs.append((g, h))
        return cls(tuple(pairs))

    @classmethod
    def vertical(cls, hs) -> "ShiftTuple":
        return cls(tuple((0, int(h)) for h in hs))

    @property
    def k(self) -> int:
        return len(self.shifts)

    @property
    def diameter(self) -> int:
        gs = [g for g, _ in self.shifts]
        hs = [h for _, h in self.shifts]
        return max(max(gs) - min(gs), max(hs) - min(hs))

    def __str__(self):
        return ";".join(f"{g},{h}" for g, h in self.shifts)


@dataclass
class AdmissibilityReport:
    admissible: bool
    prime_bound: int
    witnesses: dict[int, tuple[int, int]] = field(default_factory=dict)
    blocking_prime: int | None = None

    def as_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "prime_bound": self.prime_bound,
            "witnesses": {str(p): list(w) for p, w in sorted(self.witnesses.items())},
            "blocking_prime": self.blocking_prime,
        }


def admissibility_prime_bound(Q: QuadForm, k: int) -> int:
    """Primes above this bound cannot block: k(2p - 1) < p^2 residues are killed."""
    big = max(factorize(Q.a * Q.delta))
    return max(2 * k + 1, big)


def local_witness(Q: QuadForm, shifts: ShiftTuple, p: int):
    """First (m, n) mod p, scanning n then m, with every Q(m+g, n+h) nonzero mod p."""
    r = np.arange(p, dtype=np.int64)
    n, m = np.meshgrid(r, r, indexing="ij")
    good = np.ones((p, p), dtype=bool)
    for g, h in shifts.shifts:
        x, y = m + g, n + h
        good &= (Q.a * x * x + Q.b * x * y + Q.c * y * y) % p != 0
    idx = np.flatnonzero(good.ravel())
    if idx.size == 0:
        return None
    nn, mm = divmod(int(idx[0]), p)
    return (mm, nn)


def is_admissible(shifts: ShiftTuple, Q: QuadForm) -> AdmissibilityReport:
    bound = admissibility_prime_bound(Q, shifts.k)
    report = AdmissibilityReport(True, bound)
    for p in primes_up_to(bound):
        p = int(p)
        w = local_witness(Q, shifts, p)
        if w is None:
            report.admissible = False
            report.blocking_prime = p
            return report
        report.witnesses[p] = w
    return report


def omega_prime(p: int, Q: QuadForm) -> int:
    """#{(a, b) mod p : Q(a, b) = 0 mod p} = 1 + (p - 1) * (number of projective roots)."""
    p = int(p)
    t = np.arange(p, dtype=np.int64)
    roots = int(np.count_nonzero((Q.a * t * t + Q.b * t + Q.c) % p == 0))  # points [t : 1]
    roots += int(Q.a % p == 0)  # the point [1 : 0]
    return 1 + (p - 1) * roots


def omega_roots(d: int, Q: QuadForm) -> int:
    """Root count of Q modulo squarefree d (multiplicative)."""
    d = int(d)
    if d < 1:
        raise ValueError("d must be positive")
    f = factorize(d) if d > 1 else {}
    if any(e > 1 for e in f.values()):
        raise ValueError(f"{d} is not squarefree")
    out = 1
    for p in f:
        out *= omega_prime(p, Q)
    return out


def omega_bruteforce(d: int, Q: QuadForm) -> int:
    r = np.arange(d, dtype=np.int64)
    a, b = np.meshgrid(r, r, indexing="ij")
    return int(np.count_nonzero((Q.a * a * a + Q.b * a * b + Q.c * b * b) % d == 0))


class MultiplicativeWeight:
    """A multiplicative function on squarefree integers given by its prime values."""

    def __init__(self, name: str, prime_value):
        self.name = name
        self.prime_value = prime_value
        self._cache: dict[int, np.ndarray] = {}

    def __call__(self, d: int) -> float:
        out = 1.0
        for p, e in factorize(int(d)).items() if d > 1 else ():
            if e > 1:
                return 0.0
            out *= self.prime_value(p)
        return out

    def table(self, limit: int) -> np.ndarray:
        """Values for 0..limit (non-squarefree entries are 0, entry 0 unused)."""
        limit = int(limit)
        for lim, tab in self._cache.items():
            if lim >= limit:
                return tab[: limit + 1]
        spf = smallest_prime_factor(max(limit, 2))
        tab = np.zeros(limit + 1)
        tab[1] = 1.0
        pv: dict[int, float] = {}
        for n in range(2, limit + 1):
            p = int(spf[n])
            m = n // p
            if m % p == 0:
                continue
            if p not in pv:
                pv[p] = float(self.prime_value(p))
            tab[n] = pv[p] * tab[m]
        self._cache[limit] = tab
        return tab


def g_omega_over_square(Q: QuadForm) -> MultiplicativeWeight:
    """g(d) = omega(d) / d^2, the density weight in S_1."""
    return MultiplicativeWeight("omega/d^2", lambda p: omega_prime(p, Q) / (p * p))


def g_omega_over_nu(Q: QuadForm, ctx: FieldContext | None = None) -> MultiplicativeWeight:
    """g(d) = omega(d) / nu(d), the density weight in S_2,l."""
    ctx = ctx or FieldContext.from_form(Q)
    return MultiplicativeWeight("omega/nu", lambda p: omega_prime(p, Q) / nu_prime(p, ctx))


def g_reciprocal() -> MultiplicativeWeight:
    return MultiplicativeWeight("1/d", lambda p: 1.0 / p)


def lambda_weight(ds, F: SmoothCutoff, R: float) -> float:
    """mu(d_1)...mu(d_k) F(log d_1 / log R, ..., log d_k / log R)."""
    ds = [int(d) for d in ds]
    if any(d < 1 for d in ds):
        raise ValueError("divisors must be positive")
    if math.prod(ds) > R:
        return 0.0
    sign = math.prod(mobius(d) for d in ds)
    if sign == 0:
        return 0.0
    t = np.array([math.log(d) / math.log(R) for d in ds])
    return float(sign * F(t))


def weight_tuples(k: int, R: float, F: SmoothCutoff, W: int = 1):
    """All (d_1..d_k), squarefree and coprime to W, with prod d_i <= R and lambda != 0.

    Returns (D, lam) with D of shape (T, k).
    """
    limit = int(math.floor(R))
    if limit < 1:
        return np.zeros((0, k), dtype=np.int64), np.zeros(0)
    from .arith import mobius_table

    mu = mobius_table(max(limit, 1))
    allowed = [d for d in range(1, limit + 1) if mu[d] != 0 and math.gcd(d, W) == 1]
    tuples = []

    def rec(prefix, prod):
        if len(prefix) == k:
            tuples.append(prefix)
            return
        for d in allowed:
            if prod * d > limit:
                break
            rec(prefix + (d,), prod * d)

    rec((), 1)
    D = np.array(tuples, dtype=np.int64).reshape(-1, k)
    sign = np.prod(mu[D], axis=1)
    logR = math.log(R) if R > 1 else 1.0
    t = np.log(D) / logR
    lam = sign * F(t)
    keep = lam != 0
    return D[keep], lam[keep]


def S1_S2_sums(
    g: MultiplicativeWeight,
    F: SmoothCutoff,
    R: float,
    k: int,
    W: int = 1,
    ell: int | None = None,
    budget: int = PAIR_BUDGET,
) -> float:
    """sum_{d, e} lambda_d lambda_e prod_i g([d_i, e_i]) with (d_i, e_j) = 1 for i != j.

    With ``ell`` set (0-based), d_ell = e_ell = 1 is imposed (the S_2 sums).
    The d_i, e_i run over integers coprime to W.
    """
    if getattr(F, "k", k) != k:
        raise ValueError("cutoff dimension differs from k")
    if R > R_LIMITS.get(k, 100):
        raise CostGuardError(f"R={R:g} exceeds the limit {R_LIMITS.get(k, 100)} for k={k}")
    D, lam = weight_tuples(k, R, F, W)
    if ell is not None:
        keep = D[:, ell] == 1
        D, lam = D[keep], lam[keep]
    T = len(lam)
    if T * T > budget:
        raise CostGuardError(f"{T}^2 divisor pairs exceed the budget {budget}")
    if T == 0:
        return 0.0
    gt = g.table(int(D.max()))
    gD = gt[D]
    partial = np.zeros(T)
    for a in range(T):
        d = D[a]
        gcd = np.gcd(d[None, :], D)
        val = np.prod(gD[a][None, :] * gD / gt[gcd], axis=1)
        ok = np.ones(T, dtype=bool)
        for i in range(k):
            for j in range(k):
                if i != j:
                    ok &= np.gcd(d[i], D[:, j]) == 1
        partial[a] = lam[a] * float(np.sum(lam[ok] * val[ok]))
    return math.fsum(partial)


def phi(n: int) -> int:
    out = n
    for p in factorize(n) if n > 1 else ():
        out = out // p * (p - 1)
    return out


def sieve_sum_asymptotic(F: SmoothCutoff, R: float, k: int, W: int = 1, ell: int | None = None) -> float:
    """(W/phi(W))^k I(F)/(log R)^k, or with ell: (W/phi(W))^k J_l(F)/(log R)^(k-1)."""
    factor = (W / phi(W)) ** k
    if ell is None:
        return factor * F.I_value() / math.log(R) ** k
    return factor * F.J_value() / math.log(R) ** (k - 1)


def primorial(D0: float) -> int:
    return math.prod(int(p) for p in primes_up_to(D0)) if D0 >= 2 else 1


def select_W_residues(Q: QuadForm, shifts: ShiftTuple, D0: float) -> tuple[int, int, int]:
    """W = product of primes <= D0 and (r1, r2) with Q(r1 + g, r2 + h) coprime to W."""
    ps = [int(p) for p in primes_up_to(D0)] if D0 >= 2 else []
    if not ps:
        return 1, 0, 0
    ms, ns = [], []
    for p in ps:
        w = local_witness(Q, shifts, p)
        if w is None:
            raise AdmissibilityError(f"shifts are not admissible at p={p}", prime=p)
        ms.append(w[0])
        ns.append(w[1])
    r1, W = crt(ms, ps)
    r2, _ = crt(ns, ps)
    return W, r1, r2


@dataclass
class SieveConfig:
    form: QuadForm
    shifts: ShiftTuple
    X: float
    theta: float = 0.5
    delta: float = 0.01
    D0: float = 7
    rho: float = 1.0
    R: float | None = None

    KEYS = ("form", "shifts", "X", "theta", "delta", "D0", "rho", "R")

    @property
    def k(self) -> int:
        return self.shifts.k

    @property
    def R_value(self) -> float:
        """R defaults to X^(theta/2 - delta)."""
        return self.R if self.R is not None else self.X ** (self.theta / 2 - self.delta)

    @classmethod
    def from_mapping(cls, data: dict) -> "SieveConfig":
        unknown = set(data) - set(cls.KEYS)
        if unknown:
            raise ConfigError(f"unknown sieve config keys: {sorted(unknown)}")
        try:
            kw = {
                "form": QuadForm.parse(data["form"]),
                "shifts": ShiftTuple.parse(data["shifts"]),
                "X": float(data["X"]),
            }
            for key in ("theta", "delta", "D0", "rho", "R"):
                if key in data and data[key] not in (None, ""):
                    kw[key] = float(data[key])
        except KeyError as exc:
            raise ConfigError(f"missing sieve config key {exc}") from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        cfg = cls(**kw)
        if cfg.R_value <= 1:
            raise ConfigError(f"R = {cfg.R_value:g} must exceed 1")
        return cfg

    @classmethod
    def from_file(cls, path) -> "SieveConfig":
        from .config import read_key_value

        return cls.from_mapping(read_key_value(Path(path)))


@dataclass
class SResult:
    S: float
    prime_weighted: float
    weight_total: float
    rho: float
    points: int
    skipped: int
    W: int
    residues: tuple[int, int]
    tuples: int

    def as_dict(self) -> dict:
        return {
            "S": self.S,
            "prime_weighted_sum": self.prime_weighted,
            "weight_sum": self.weight_total,
            "rho": self.rho,
            "points": self.points,
            "skipped_points": self.skipped,
            "W": self.W,
            "residues": list(self.residues),
            "weight_tuples": self.tuples,
        }


def window_points(Q: QuadForm, X: float, W: int = 1, r1: int = 0, r2: int = 0, budget=None):
    """Points with X < Q(m, n) <= 2X and (m, n) = (r1, r2) mod W."""
    ms, ns = [], []
    kw = {} if budget is None else {"budget": budget}
    for m, n, v in iter_points(Q, 2 * X, **kw):
        keep = (v > X) & ((m - r1) % W == 0) & ((n - r2) % W == 0)
        ms.append(m[keep])
        ns.append(n[keep])
    if not ms:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(ms), np.concatenate(ns)


def brute_S(Q: QuadForm, shifts: ShiftTuple, config: SieveConfig, F: SmoothCutoff, budget: int = 10**7) -> SResult:
    """S(X, rho) by direct enumeration of the W-restricted dyadic window."""
    if expected_points(Q, 2 * config.X) > budget:
        raise CostGuardError(f"window 2X={2 * config.X:g} exceeds the point budget {budget}")
    k = shifts.k
    W, r1, r2 = select_W_residues(Q, shifts, config.D0)
    m, n = window_points(Q, config.X, W, r1, r2)
    R = config.R_value
    D, lam = weight_tuples(k, R, F, W)
    vals = np.stack(
        [Q.a * (m + g) ** 2 + Q.b * (m + g) * (n + h) + Q.c * (n + h) ** 2 for g, h in shifts.shifts],
        axis=1,
    ) if m.size else np.zeros((0, k), dtype=np.int64)
    bad = np.any(vals <= 0, axis=1)
    vals = vals[~bad]
    chi = is_prime_array(vals).sum(axis=1) if vals.size else np.zeros(0)
    Lsum = np.zeros(vals.shape[0])
    for d, w in zip(D, lam):
        hit = np.ones(vals.shape[0], dtype=bool)
        for i in range(k):
            if d[i] > 1:
                hit &= vals[:, i] % d[i] == 0
        Lsum += w * hit
    L2 = Lsum * Lsum
    main = math.fsum(chi * L2)
    tot = math.fsum(L2)
    return SResult(
        S=main - config.rho * tot,
        prime_weighted=main,
        weight_total=tot,
        rho=config.rho,
        points=int(vals.shape[0]),
        skipped=int(bad.sum()),
        W=W,
        residues=(r1, r2),
        tuples=len(lam),
    )


def common_factor_ok(Q: QuadForm, shifts: ShiftTuple, m, n) -> np.ndarray:
    """Per point: every prime shared by two shifted values divides the Lemma bound.

    For shifts i, j the bound is a Q(dg, dh) Q(dg, -dh) with (dg, dh) the
    difference of the shifts.
    """
    m = np.asarray(m, dtype=np.int64)
    n = np.asarray(n, dtype=np.int64)
    vals = [Q.a * (m + g) ** 2 + Q.b * (m + g) * (n + h) + Q.c * (n + h) ** 2 for g, h in shifts.shifts]
    ok = np.ones(m.shape, dtype=bool)
    S = shifts.shifts
    for i in range(len(S)):
        for j in range(i + 1, len(S)):
            dg, dh = S[j][0] - S[i][0], S[j][1] - S[i][1]
            P = Q.a * Q(dg, dh) * Q(dg, -dh)
            ok &= radical_divides(np.gcd(vals[i], vals[j]), P)
    return ok


@dataclass
class Lemma1Report:
    form: tuple[int, int, int]
    shift: tuple[int, int]
    bound_product: int
    trials: int
    with_common_factor: int
    violations: list = field(default_factory=list)
    primes_seen: list = field(default_factory=list)
    violation_count: int = 0

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def as_dict(self) -> dict:
        return {
            "form": list(self.form),
            "shift": list(self.shift),
            "bound_product": self.bound_product,
            "trials": self.trials,
            "with_common_factor": self.with_common_factor,
            "violation_count": self.violation_count,
            "violations": [[m, n, g, bad] for m, n, g, bad in self.violations],
            "primes_seen": self.primes_seen,
        }


def lemma1_check(Q: QuadForm, g: int, h: int, trials: int = 10**5, seed: int = 0, box: int = 10**5) -> Lemma1Report:
    """Randomised test that shared primes of Q(m, n), Q(m + g, n + h) divide a Q(g, h) Q(g, -h).

    Each violation is reported as (m, n, gcd, primes outside the bound).
    A split prime p can divide both values when m/n and (m+g)/(n+h) are the
    two distinct roots of Q(x, 1) mod p, so violations do occur. With a
    single common root the claim holds: p | Q(g, h).
    Half the trials are uniform in a box; the rest are planted: a small prime p
    and a residue pair where both values vanish mod p are lifted randomly.
    """
    if (g, h) == (0, 0):
        raise ValueError("(g, h) must be nonzero")
    rng = np.random.default_rng(seed)
    P = Q.a * Q(g, h) * Q(g, -h)
    half = trials // 2
    m = rng.integers(-box, box + 1, size=trials)
    n = rng.integers(-box, box + 1, size=trials)
    # planted trials: common roots mod small primes
    planted = []
    for p in primes_up_to(200):
        p = int(p)
        r = np.arange(p)
        a_, b_ = np.meshgrid(r, r, indexing="ij")
        both = ((Q.a * a_ * a_ + Q.b * a_ * b_ + Q.c * b_ * b_) % p == 0) & (
            (Q.a * (a_ + g) ** 2 + Q.b * (a_ + g) * (b_ + h) + Q.c * (b_ + h) ** 2) % p == 0
        )
        for u, v in zip(a_[both], b_[both]):
            planted.append((p, int(u), int(v)))
    if planted and trials - half > 0:
        pick = rng.integers(0, len(planted), size=trials - half)
        for idx, t in enumerate(range(half, trials)):
            p, u, v = planted[pick[idx]]
            m[t] = u + p * rng.integers(-box // p, box // p + 1)
            n[t] = v + p * rng.integers(-box // p, box // p + 1)
    # the origin has Q = 0: no prime divisors in scope
    zero = (m == 0) & (n == 0)
    m, n = m[~zero], n[~zero]
    v1 = Q.a * m * m + Q.b * m * n + Q.c * n * n
    v2 = Q.a * (m + g) ** 2 + Q.b * (m + g) * (n + h) + Q.c * (n + h) ** 2
    G = np.gcd(v1, v2)
    common = G > 1
    ok = radical_divides(G, P)
    report = Lemma1Report(Q.as_tuple(), (g, h), int(P), int(m.size), int(common.sum()))
    report.violation_count = int((~ok).sum())
    for i in np.flatnonzero(~ok)[:20]:
        bad = [p for p in factorize(int(G[i])) if P % p]
        report.violations.append((int(m[i]), int(n[i]), int(G[i]), bad))
    seen = set()
    for val in np.unique(G[common & ok]):
        seen.update(factorize(int(val)))
    report.primes_seen = sorted(seen)
    return report


@dataclass
class DeltaQEstimate:
    trace: list[tuple[float, float]]

    @property
    def estimate(self) -> float:
        return self.trace[-1][1]

    def as_dict(self) -> dict:
        return {"trace": [list(t) for t in self.trace], "estimate": self.estimate}


def estimate_delta_Q(Q: QuadForm, xs=(10**4, 10**5, 10**6)) -> DeltaQEstimate:
    """delta_Q(x) = pi(x, Q) h(-Delta) log x / x at each x (the main-term constant is not given in closed form)."""
    h = class_number(Q.delta).h
    return DeltaQEstimate([(float(x), pi_Q(Q, x) * h * math.log(x) / x) for x in xs])
