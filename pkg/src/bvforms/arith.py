"""Elementary integer arithmetic: primality, factorization, Moebius, Kronecker.

Bulk primality goes through a cached numpy sieve; single values above the
sieve range use a deterministic Miller-Rabin test.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

# Jaeschke/Sorenson-Webster: these bases are deterministic below 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_LIMIT = 3_317_044_064_679_887_385_961_981

SIEVE_DEFAULT = 10**7
SIEVE_MAX = 2 * 10**8

_sieve_cache = np.zeros(0, dtype=bool)


def is_prime(n: int) -> bool:
    """Deterministic strong-pseudoprime test for n < 3.3e24."""
    n = int(n)
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n >= _MR_LIMIT:
        raise OverflowError(f"{n} is outside the deterministic Miller-Rabin range")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_sieve(limit: int) -> np.ndarray:
    """Boolean table ``t`` with ``t[n]`` true iff n is prime, for n <= limit.

    The table is cached and grown on demand; callers must not mutate it.
    """
    global _sieve_cache
    limit = int(limit)
    if limit < _sieve_cache.size:
        return _sieve_cache[: limit + 1]
    if limit > SIEVE_MAX:
        raise OverflowError(f"sieve limit {limit} exceeds {SIEVE_MAX}")
    size = max(limit, SIEVE_DEFAULT if limit > 10**5 else limit) + 1
    t = np.ones(size, dtype=bool)
    t[:2] = False
    for p in range(2, math.isqrt(size - 1) + 1):
        if t[p]:
            t[p * p :: p] = False
    _sieve_cache = t
    return t[: limit + 1]


def primes_up_to(n: float) -> np.ndarray:
    n = int(math.floor(n))
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(prime_sieve(n)).astype(np.int64)


def is_prime_array(values) -> np.ndarray:
    """Vectorised primality for nonnegative integer arrays."""
    v = np.asarray(values, dtype=np.int64)
    if v.size == 0:
        return np.zeros(v.shape, dtype=bool)
    top = int(v.max())
    if top <= SIEVE_MAX:
        return prime_sieve(max(top, 2))[v]
    out = np.empty(v.shape, dtype=bool)
    flat = v.ravel()
    small = flat <= SIEVE_MAX
    res = out.ravel()
    res[small] = prime_sieve(SIEVE_MAX)[flat[small]]
    res[~small] = [is_prime(int(x)) for x in flat[~small]]
    return out


def trial_division_is_prime(limit: int) -> np.ndarray:
    """Primality table by trial division against every integer d <= sqrt(n).

    Deliberately sieve-free: it serves as the independent oracle for
    :func:`prime_sieve`.
    """
    n = np.arange(limit + 1, dtype=np.int64)
    prime = n >= 2
    for d in range(2, math.isqrt(limit) + 1):
        prime &= (n % d != 0) | (n == d)
    return prime


@lru_cache(maxsize=8)
def smallest_prime_factor(limit: int) -> np.ndarray:
    spf = np.arange(limit + 1, dtype=np.int64)
    for p in primes_up_to(math.isqrt(limit)):
        p = int(p)
        block = spf[p * p :: p]
        block[block == np.arange(p * p, limit + 1, p)] = p
    return spf


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division; adequate for n below ~1e14."""
    n = int(n)
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(n).values())


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def mobius_table(limit: int) -> np.ndarray:
    mu = np.ones(limit + 1, dtype=np.int64)
    mu[0] = 0
    for p in primes_up_to(limit):
        p = int(p)
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n) via quadratic reciprocity, no factorization."""
    a, n = int(a), int(n)
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # n is now odd and positive: Jacobi symbol.
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def legendre_euler(a: int, p: int) -> int:
    """Legendre symbol by Euler's criterion; oracle for :func:`kronecker`."""
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def crt(residues, moduli) -> tuple[int, int]:
    """Combine pairwise coprime congruences; returns (r, M)."""
    r, m = 0, 1
    for ri, mi in zip(residues, moduli):
        ri, mi = int(ri), int(mi)
        if math.gcd(m, mi) != 1:
            raise ValueError("moduli must be pairwise coprime")
        t = ((ri - r) * pow(m, -1, mi)) % mi
        r, m = r + m * t, m * mi
    return r % m, m


def radical_divides(n, p):
    """Elementwise test that every prime of n divides p (n | p**inf).

    Works on numpy int64 arrays without factoring anything.
    """
    n = np.abs(np.asarray(n, dtype=np.int64)).copy()
    p = np.abs(np.asarray(p, dtype=np.int64))
    n, p = np.broadcast_arrays(n, p)
    n = n.copy()
    for _ in range(64):
        g = np.gcd(n, p)
        active = (g > 1) & (n > 1)
        if not active.any():
            break
        n[active] //= g[active]
    return n == 1
