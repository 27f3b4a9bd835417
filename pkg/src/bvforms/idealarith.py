"""Arithmetic of K = Q(sqrt(-Delta)) needed by the equidistribution harness.

Covers prime splitting, the unit counting function nu(q) = phi((q)), the
ray class number h((q)) and the prime ideal counting function.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .arith import factorize, is_prime, kronecker, primes_up_to
from .errors import CostGuardError, FieldError
from .forms import QuadForm, class_number, is_fundamental

NU_BRUTEFORCE_MAX = 10**4


class SplitType(enum.Enum):
    SPLIT = "split"
    INERT = "inert"
    RAMIFIED = "ramified"


@dataclass(frozen=True)
class FieldContext:
    """Field data for Q(sqrt(-delta)); delta must give a fundamental discriminant."""

    delta: int
    class_number: int
    unit_count: int

    @classmethod
    def from_delta(cls, delta: int) -> "FieldContext":
        delta = int(delta)
        if not is_fundamental(delta):
            raise FieldError(
                f"-{delta} is not a fundamental discriminant; pass the fundamental part "
                "of the discriminant (the standing hypotheses on Delta guarantee one)"
            )
        units = {3: 6, 4: 4}.get(delta, 2)
        return cls(delta, class_number(delta).h, units)

    @classmethod
    def from_form(cls, Q: QuadForm) -> "FieldContext":
        return cls.from_delta(Q.delta)

    @property
    def fundamental_disc(self) -> int:
        return -self.delta

    @property
    def unit_index_default(self) -> int:
        """[U : U_{q,1}] for moduli q with 2 not in (q)."""
        return self.unit_count

    @property
    def small_unit_group(self) -> bool:
        return self.unit_count == 2


def split_type(p: int, ctx: FieldContext) -> SplitType:
    p = int(p)
    if not is_prime(p):
        raise FieldError(f"{p} is not prime")
    k = kronecker(-ctx.delta, p)
    return {1: SplitType.SPLIT, -1: SplitType.INERT, 0: SplitType.RAMIFIED}[k]


def nu_prime(p: int, ctx: FieldContext) -> int:
    t = split_type(p, ctx)
    if t is SplitType.SPLIT:
        return (p - 1) ** 2
    if t is SplitType.INERT:
        return p * p - 1
    return p * p - p


def nu(q: int, ctx: FieldContext) -> int:
    """nu(q) = phi((q)), multiplicative with nu(p^e) = p^(2(e-1)) nu(p)."""
    q = int(q)
    if q < 1:
        raise FieldError(f"nu is defined for q >= 1, got {q}")
    out = 1
    for p, e in factorize(q).items():
        out *= p ** (2 * (e - 1)) * nu_prime(p, ctx)
    return out


def coprime_class_mask(Q: QuadForm, q: int) -> np.ndarray:
    """Boolean q x q table: entry [u, v] says gcd(Q(u, v), q) = 1."""
    q = int(q)
    a, b, c = Q.a % q, Q.b % q, Q.c % q
    v = np.arange(q, dtype=np.int64)
    out = np.empty((q, q), dtype=bool)
    step = max(1, 2_000_000 // q)
    for lo in range(0, q, step):
        u = np.arange(lo, min(q, lo + step), dtype=np.int64)[:, None]
        vals = (a * (u * u % q) + b * (u * v[None, :] % q) + c * (v * v % q)[None, :]) % q
        out[lo : lo + step] = np.gcd(vals, q) == 1
    return out


def nu_bruteforce(q: int, Q: QuadForm) -> int:
    """Count (u, v) in [0, q)^2 with gcd(Q(u, v), q) = 1 by direct scan."""
    q = int(q)
    if q < 1:
        raise FieldError(f"modulus must be positive, got {q}")
    if q > NU_BRUTEFORCE_MAX:
        raise CostGuardError(f"nu_bruteforce limited to q <= {NU_BRUTEFORCE_MAX}")
    return int(coprime_class_mask(Q, q).sum())


def ray_class_size(q: int, ctx: FieldContext) -> int:
    """h((q)) = phi((q)) h_K / [U : U_{(q),1}] (no real places)."""
    q = int(q)
    if q < 1:
        raise FieldError(f"modulus must be positive, got {q}")
    if q <= 2:
        # 2 lies in (q): the unit index is not the generic one and is left open
        raise FieldError(f"ray class formula not applied for q={q}: 2 lies in (q)")
    num = nu(q, ctx) * ctx.class_number
    if num % ctx.unit_index_default:
        raise FieldError("ray class number is not an integer; check the field data")
    return num // ctx.unit_index_default


def prime_ideal_count(y: float, ctx: FieldContext) -> int:
    """Number of prime ideals of O_K with norm <= y."""
    if y < 2:
        return 0
    total = 0
    for p in primes_up_to(y):
        p = int(p)
        t = split_type(p, ctx)
        if t is SplitType.SPLIT:
            total += 2
        elif t is SplitType.RAMIFIED:
            total += 1
        elif p * p <= y:
            total += 1
    return total


def _representations(form: QuadForm, n: int) -> int:
    """#{(x, y) in Z^2 : form(x, y) = n} by bounded scan."""
    a, b, c = form.as_tuple()
    D = form.delta
    count = 0
    ymax = math.isqrt(4 * a * n // D) + 1
    for y in range(-ymax, ymax + 1):
        # a x^2 + b y x + (c y^2 - n) = 0
        disc = b * b * y * y - 4 * a * (c * y * y - n)
        if disc < 0:
            continue
        r = math.isqrt(disc)
        if r * r != disc:
            continue
        for num in {-b * y + r, -b * y - r}:
            if num % (2 * a) == 0:
                count += 1
    return count


def prime_ideal_count_by_forms(y: float, delta: int) -> int:
    """Oracle for :func:`prime_ideal_count` that never uses a Kronecker symbol.

    Ideals of norm n correspond to representations of n by the reduced forms
    of discriminant -delta, each counted w times (w = number of units).
    """
    reduced = class_number(delta).forms
    w = {3: 6, 4: 4}.get(int(delta), 2)
    total = 0
    for p in primes_up_to(y):
        p = int(p)
        of_norm_p = sum(_representations(f, p) for f in reduced)
        if of_norm_p % w:
            raise FieldError("representation count not divisible by the unit count")
        total += of_norm_p // w
        if of_norm_p == 0 and p * p <= y:
            # no prime of norm p: (p) itself is prime, of norm p^2
            total += sum(_representations(f, p * p) for f in reduced) // w
    return total


def dirichlet_class_number(delta: int, terms: int = 10**6) -> float:
    """Class number from the truncated Dirichlet series for L(1, chi).

    h = w sqrt(delta) / (2 pi) * sum_{n <= terms} chi(n) / n with chi the
    Kronecker character of -delta. Only meaningful for fundamental -delta.
    """
    delta = int(delta)
    if not is_fundamental(delta):
        raise FieldError(f"-{delta} is not fundamental")
    period = np.array([kronecker(-delta, n) for n in range(delta)], dtype=np.float64)
    n = np.arange(1, terms + 1)
    chi = period[n % delta]
    L = float(np.sum(chi / n))
    w = {3: 6, 4: 4}.get(delta, 2)
    return w * math.sqrt(delta) / (2 * math.pi) * L
