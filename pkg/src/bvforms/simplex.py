"""Exact integration of symmetric polynomials over the simplex.

Symmetric polynomials in k variables are handled as linear combinations of
power-sum products p_lambda. Integrals go through the monomial symmetric
expansion p_lambda = sum_mu L[lambda, mu] m_mu, whose coefficients do not
depend on k, and the Dirichlet integral

    int_{Delta_k} t^a (1 - t_1 - ... - t_k)^e dt = prod(a_i!) e! / (k + |a| + e)!.

So the Gram matrices of the functionals

    I(G)   = int_{Delta_k} G^2,
    kJ(G)  = sum_l int_{Delta_{k-1}} (int_0^{1 - sum_{i != l} t_i} G dt_l)^2

cost the same for k = 3 and k = 300.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import FormError

Partition = tuple[int, ...]


def simplex_monomial_integral(exponents) -> Fraction:
    """int over {t_i >= 0, sum t_i <= 1} of prod t_i^{a_i}, exactly."""
    a = [int(e) for e in exponents]
    if any(e < 0 for e in a):
        raise ValueError("exponents must be nonnegative")
    num = 1
    for e in a:
        num *= math.factorial(e)
    return Fraction(num, math.factorial(len(a) + sum(a)))


def _norm(parts) -> Partition:
    return tuple(sorted((p for p in parts if p > 0), reverse=True))


def partitions_up_to(total: int, max_part: int | None = None) -> list[Partition]:
    """All partitions of 0..total (parts bounded by max_part), by size then lexicographically."""
    out = []

    def rec(remaining, cap, prefix):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for part in range(min(remaining, cap), 0, -1):
            rec(remaining - part, part, prefix + [part])

    cap = total if max_part is None else max_part
    for n in range(total + 1):
        rec(n, max(cap, 0), [])
    return [p for p in out if sum(p) <= total]


@lru_cache(maxsize=None)
def power_to_monomial(lam: Partition) -> dict[Partition, int]:
    """Coefficients of p_lambda in the monomial symmetric basis m_mu."""
    lam = _norm(lam)
    if not lam:
        return {(): 1}
    r = lam[-1]
    rest = power_to_monomial(lam[:-1])
    out: dict[Partition, int] = defaultdict(int)
    for mu, coef in rest.items():
        targets = {_norm(mu + (r,))}
        for w in set(mu):
            tgt = list(mu)
            tgt.remove(w)
            targets.add(_norm(tgt + [w + r]))
        for nu in targets:
            out[nu] += coef * _p_times_m_coeff(r, mu, nu)
    return dict(out)


def _p_times_m_coeff(r: int, mu: Partition, nu: Partition) -> int:
    """Coefficient of m_nu in p_r * m_mu."""
    mult = Counter(nu)
    total = 0
    for v, cnt in mult.items():
        if v < r:
            continue
        tgt = list(nu)
        tgt.remove(v)
        if v > r:
            tgt.append(v - r)
        if _norm(tgt) == mu:
            total += cnt
    return total


def arrangements(mu: Partition, k: int) -> int:
    """Number of distinct exponent vectors in k variables with multiset mu."""
    length = len(mu)
    if length > k:
        return 0
    out = math.factorial(k) // math.factorial(k - length)
    for cnt in Counter(mu).values():
        out //= math.factorial(cnt)
    return out


@lru_cache(maxsize=None)
def msym_integral(mu: Partition, k: int, extra: int = 0) -> Fraction:
    """int_{Delta_k} m_mu(t) (1 - sum t)^extra dt."""
    n = arrangements(mu, k)
    if n == 0:
        return Fraction(0)
    num = n * math.factorial(extra)
    for part in mu:
        num *= math.factorial(part)
    return Fraction(num, math.factorial(k + sum(mu) + extra))


@lru_cache(maxsize=None)
def power_integral(lam: Partition, k: int, extra: int = 0) -> Fraction:
    """int_{Delta_k} p_lambda(t) (1 - sum t)^extra dt."""
    return sum(
        (c * msym_integral(mu, k, extra) for mu, c in power_to_monomial(_norm(lam)).items()),
        Fraction(0),
    )


@lru_cache(maxsize=None)
def _peel_last_variable(lam: Partition) -> dict[tuple[int, Partition], int]:
    """Write p_lambda(t_1..t_k) = sum_e t_k^e * (poly in power sums of t_1..t_{k-1}).

    Returns {(e, mu): coeff} meaning sum coeff * t_k^e * p'_mu.
    """
    out: dict[tuple[int, Partition], int] = defaultdict(int)
    for mask in itertools.product((0, 1), repeat=len(lam)):
        e = sum(p for p, bit in zip(lam, mask) if bit)
        mu = _norm(p for p, bit in zip(lam, mask) if not bit)
        out[(e, mu)] += 1
    return dict(out)


@lru_cache(maxsize=None)
def _antiderivative_terms(lam: Partition) -> dict[tuple[int, Partition], Fraction]:
    """int_0^{1-s} p_lambda dt_k as {(power of (1-s), mu): coeff} over p'_mu."""
    return {
        (e + 1, mu): Fraction(c, e + 1) for (e, mu), c in _peel_last_variable(lam).items()
    }


def basis_partitions(k: int, d_max: int) -> list[Partition]:
    """Power-sum products of total degree <= d_max using P_1..P_k.

    P_1..P_k are algebraically independent in k variables, so these products
    are linearly independent polynomials.
    """
    if k < 1 or d_max < 0:
        raise ValueError("need k >= 1 and d_max >= 0")
    return partitions_up_to(d_max, max_part=k)


class DegenerateBasisError(FormError):
    """The I Gram matrix is not positive definite on the basis."""


def ldl_exact(M):
    """Rational L D L^T factorization; raises DegenerateBasisError if not PD."""
    n = len(M)
    L = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    D = [Fraction(0)] * n
    for j in range(n):
        D[j] = M[j][j] - sum((L[j][p] ** 2 * D[p] for p in range(j)), Fraction(0))
        if D[j] <= 0:
            raise DegenerateBasisError(f"Gram matrix not positive definite at pivot {j}")
        for i in range(j + 1, n):
            s = M[i][j] - sum((L[i][p] * L[j][p] * D[p] for p in range(j)), Fraction(0))
            L[i][j] = s / D[j]
    return L, D


@dataclass(frozen=True)
class FunctionalPair:
    """Exact Gram matrices of I and of sum_l J_l on a symmetric basis."""

    k: int
    basis: tuple[Partition, ...]
    I_exact: tuple[tuple[Fraction, ...], ...]
    J_exact: tuple[tuple[Fraction, ...], ...]

    @property
    def I_matrix(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.I_exact])

    @property
    def J_matrix(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.J_exact])

    def quotient_exact(self, coeffs) -> Fraction:
        """kJ(G)/I(G) for G = sum coeffs_i p_{basis_i}, in exact arithmetic."""
        c = [Fraction(v) for v in coeffs]
        return _quad(self.J_exact, c) / _quad(self.I_exact, c)


def _quad(M, c) -> Fraction:
    n = len(c)
    return sum((c[i] * M[i][j] * c[j] for i in range(n) for j in range(n)), Fraction(0))


def gram_I_entry(lam: Partition, mu: Partition, k: int) -> Fraction:
    return power_integral(_norm(lam + mu), k)


def gram_J_entry(lam: Partition, mu: Partition, k: int) -> Fraction:
    """sum over l of int_{Delta_{k-1}} (int G_lam dt_l)(int G_mu dt_l), G symmetric."""
    A = _antiderivative_terms(lam)
    B = _antiderivative_terms(mu)
    total = Fraction(0)
    for (e1, m1), c1 in A.items():
        for (e2, m2), c2 in B.items():
            total += c1 * c2 * power_integral(_norm(m1 + m2), k - 1, e1 + e2)
    return k * total


def build_functional(k: int, d_max: int, basis=None) -> FunctionalPair:
    """Assemble I and kJ Gram matrices exactly for the symmetric basis."""
    basis = tuple(basis_partitions(k, d_max) if basis is None else (_norm(b) for b in basis))
    if not basis:
        raise ValueError("empty basis")
    n = len(basis)
    I = [[Fraction(0)] * n for _ in range(n)]
    J = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            I[i][j] = I[j][i] = gram_I_entry(basis[i], basis[j], k)
            J[i][j] = J[j][i] = gram_J_entry(basis[i], basis[j], k)
    ldl_exact(I)  # raises on a linearly dependent basis
    return FunctionalPair(k, basis, tuple(map(tuple, I)), tuple(map(tuple, J)))


# ---------------------------------------------------------------------------
# explicit polynomials (small k only)


def power_product_monomials(lam: Partition, k: int) -> dict[tuple[int, ...], int]:
    """Expand p_lambda in k variables into monomials {exponent vector: coeff}."""
    poly = {(0,) * k: 1}
    for r in lam:
        nxt: dict[tuple[int, ...], int] = defaultdict(int)
        for exps, c in poly.items():
            for i in range(k):
                e = list(exps)
                e[i] += r
                nxt[tuple(e)] += c
        poly = dict(nxt)
    return poly


@dataclass(frozen=True)
class SimplexPolynomial:
    """G = sum_i coeffs[i] * p_{basis[i]} on the k-simplex."""

    k: int
    basis: tuple[Partition, ...]
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if len(self.basis) != len(self.coeffs):
            raise ValueError("basis and coefficients differ in length")

    @property
    def degree(self) -> int:
        return max((sum(b) for b in self.basis), default=0)

    def monomials(self) -> dict[tuple[int, ...], float]:
        out: dict[tuple[int, ...], float] = defaultdict(float)
        for lam, c in zip(self.basis, self.coeffs):
            for exps, m in power_product_monomials(lam, self.k).items():
                out[exps] += c * m
        return dict(out)

    def __call__(self, t) -> np.ndarray:
        """Evaluate at points t of shape (..., k)."""
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros(t.shape[:-1])
        for lam, c in zip(self.basis, self.coeffs):
            term = np.ones(t.shape[:-1])
            for r in lam:
                term = term * np.sum(t**r, axis=-1)
            out = out + c * term
        return out


class SmoothCutoff:
    """The cutoff F whose mixed partial derivative is (-1)^k G.

    F(t) = int_{s >= t, sum s <= 1} G(s) ds, which vanishes outside the
    simplex and on its face sum t = 1. Evaluation is exact term by term:
    with r = 1 - sum t, F(t) = int_{r Delta_k} G(t + u) du.
    The ``scale`` multiplies F (the default makes F(0) = 1).
    """

    def __init__(self, G: SimplexPolynomial, scale: float | None = None):
        self.G = G
        self.k = G.k
        terms: dict[tuple[tuple[int, ...], int], float] = defaultdict(float)
        k = self.k
        for a, c in G.monomials().items():
            if c == 0:
                continue
            for j in itertools.product(*(range(ai + 1) for ai in a)):
                coef = c
                for ai, ji in zip(a, j):
                    coef *= math.comb(ai, ji) * math.factorial(ji)
                coef /= math.factorial(k + sum(j))
                terms[(tuple(ai - ji for ai, ji in zip(a, j)), k + sum(j))] += coef
        self._terms = [(np.array(e), p, c) for (e, p), c in terms.items() if c != 0]
        self.scale = 1.0
        if scale is None:
            f0 = float(self.raw(np.zeros(k)))
            scale = 1.0 / f0 if f0 != 0 else 1.0
        self.scale = scale

    def raw(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        r = 1.0 - t.sum(axis=-1)
        out = np.zeros(t.shape[:-1])
        for e, p, c in self._terms:
            out = out + c * np.prod(t**e, axis=-1) * r**p
        inside = (r > 0) & np.all(t >= 0, axis=-1)
        return np.where(inside, out, 0.0)

    def __call__(self, t) -> np.ndarray:
        return self.scale * self.raw(t)

    def I_value(self, fp: FunctionalPair | None = None) -> float:
        """I(F) = int G^2 for the scaled cutoff."""
        fp = fp or build_functional(self.k, 0, basis=self.G.basis)
        c = np.array(self.G.coeffs) * self.scale
        return float(c @ fp.I_matrix @ c)

    def J_value(self, fp: FunctionalPair | None = None) -> float:
        """J_l(F) for a single l (the functional is symmetric)."""
        fp = fp or build_functional(self.k, 0, basis=self.G.basis)
        c = np.array(self.G.coeffs) * self.scale
        return float(c @ fp.J_matrix @ c) / self.k
