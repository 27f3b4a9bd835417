"""Maximisation of M_k = sup kJ(G)/I(G) over symmetric polynomial G.

The generalized eigenproblem J v = lambda I v is whitened exactly: I is
factored as L D L^T over the rationals, so positive definiteness is decided
without rounding, and only the well-conditioned matrix
D^{-1/2} L^{-1} J L^{-T} D^{-1/2} is handed to floating point. The reported
M_k is the exact Rayleigh quotient of the returned coefficients, hence a
rigorous lower bound for the supremum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConfigError, ConvergenceError
from .forms import QuadForm, class_number, validate_paper_conditions
from .sieve import (
    AdmissibilityReport,
    DeltaQEstimate,
    ShiftTuple,
    admissibility_prime_bound,
    estimate_delta_Q,
    is_admissible,
)
from .arith import primes_up_to
from .simplex import DegenerateBasisError, FunctionalPair, SimplexPolynomial, build_functional, ldl_exact

log = logging.getLogger(__name__)

POWER_TOL = 1e-12
POWER_MAX_ITER = 100_000


def _forward(L, B):
    """Solve L X = B for unit lower triangular L (columns of B at once)."""
    n = len(L)
    X = [list(row) for row in B]
    for i in range(n):
        for p in range(i):
            if L[i][p]:
                lip = L[i][p]
                X[i] = [x - lip * y for x, y in zip(X[i], X[p])]
    return X


def _backward_T(L, z):
    """Solve L^T c = z."""
    n = len(L)
    c = list(z)
    for i in range(n - 1, -1, -1):
        for p in range(i + 1, n):
            if L[p][i]:
                c[i] -= L[p][i] * c[p]
    return c


def whitened_matrix(fp: FunctionalPair):
    """Return (A, L, D) with A = D^-1/2 L^-1 J L^-T D^-1/2 as floats."""
    L, D = ldl_exact(fp.I_exact)
    Y = _forward(L, fp.J_exact)  # L^-1 J
    C = _forward(L, [list(col) for col in zip(*Y)])  # L^-1 (L^-1 J)^T
    n = len(D)
    A = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            v = C[i][j]
            # |v| / sqrt(D_i D_j) computed as a rational first: D_i can underflow a double
            A[i, j] = math.copysign(math.sqrt(float(v * v / (D[i] * D[j]))), float(v)) if v else 0.0
    A = 0.5 * (A + A.T)
    return A, L, D


def power_iteration(A: np.ndarray, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER):
    """Dominant eigenpair of a symmetric PSD matrix from a fixed start vector.

    Stops when ||A w - lambda w|| <= tol * lambda.
    """
    n = A.shape[0]
    w = np.ones(n) / math.sqrt(n)
    lam = float(w @ A @ w)
    for it in range(1, max_iter + 1):
        z = A @ w
        norm = np.linalg.norm(z)
        if norm == 0:
            return 0.0, w, it, 0.0
        w = z / norm
        Aw = A @ w
        lam = float(w @ Aw)
        res = float(np.linalg.norm(Aw - lam * w))
        if res <= tol * abs(lam):
            return lam, w, it, res
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps (residual {res:.3g})")


@dataclass
class MkResult:
    k: int
    d_max: int
    Mk: float
    eigenvalue: float
    coeffs: tuple[float, ...]
    basis: tuple[tuple[int, ...], ...]
    iterations: int
    residual: float
    conditioning: float
    functional: FunctionalPair = field(repr=False, default=None)

    @property
    def polynomial(self) -> SimplexPolynomial:
        return SimplexPolynomial(self.k, self.basis, self.coeffs)

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "dmax": self.d_max,
            "Mk": self.Mk,
            "eigenvalue": self.eigenvalue,
            "coeffs": list(self.coeffs),
            "basis": [list(b) for b in self.basis],
            "iterations": self.iterations,
            "residual": self.residual,
            "I_condition_number": self.conditioning,
            "normalization": "J summed over all l, so Mk = kJ_k/I = lambda_max",
        }


def maximize_Mk(
    k: int,
    d_max: int,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
    functional: FunctionalPair | None = None,
) -> MkResult:
    """Largest kJ_k/I over symmetric polynomials G of degree <= d_max."""
    fp = functional or build_functional(k, d_max)
    A, L, D = whitened_matrix(fp)
    lam, w, iters, res = power_iteration(A, tol, max_iter)
    if w.sum() < 0:
        w = -w
    z = [Fraction(float(wi)) / Fraction(math.sqrt(float(Di))) for wi, Di in zip(w, D)]
    c = _backward_T(L, z)
    # scale so the largest coefficient has unit size; the quotient is scale free
    big = max(abs(v) for v in c)
    c = [v / big for v in c]
    certified = float(fp.quotient_exact(c))
    Ival = np.array([float(d) for d in D])
    cond = float(Ival.max() / Ival.min()) if Ival.min() > 0 else math.inf
    return MkResult(
        k=k,
        d_max=d_max,
        Mk=certified,
        eigenvalue=lam,
        coeffs=tuple(float(v) for v in c),
        basis=fp.basis,
        iterations=iters,
        residual=res,
        conditioning=cond,
        functional=fp,
    )


def rho_threshold(
    k: int,
    theta: float,
    delta: float,
    Q: QuadForm,
    delta_Q_estimate: float | None,
    Mk: float,
) -> float:
    """(theta/2 - delta) * delta_Q sqrt(Delta) / (2 pi h(-Delta)) * M_k.

    A value above 1 leaves room for a threshold rho > 1.
    """
    if delta_Q_estimate is None:
        raise ConfigError("a delta_Q estimate is required")
    h = class_number(Q.delta).h
    return (theta / 2 - delta) * delta_Q_estimate * math.sqrt(Q.delta) / (2 * math.pi * h) * Mk


@dataclass
class NarrowTuple:
    shifts: ShiftTuple
    certificate: AdmissibilityReport
    interval: int

    @property
    def diameter(self) -> int:
        return self.shifts.diameter

    @property
    def hs(self) -> list[int]:
        return [h for _, h in self.shifts.shifts]


_NARROW_INTERVAL = 4096


def _greedy_survivors(Q: QuadForm, primes, U: int) -> np.ndarray:
    """Sieve h in [0, U]: per prime keep the residue (m, n) killing the fewest survivors."""
    alive = np.arange(U + 1, dtype=np.int64)
    for p in primes:
        p = int(p)
        r = np.arange(p, dtype=np.int64)
        # zero[n, m, j]: Q(m, n + j) = 0 mod p
        n = r[:, None, None]
        m = r[None, :, None]
        y = n + r[None, None, :]
        zero = (Q.a * m * m + Q.b * m * y + Q.c * y * y) % p == 0
        hist = np.bincount(alive % p, minlength=p)
        killed = (zero * hist[None, None, :]).sum(axis=2).ravel()
        best = int(np.argmin(killed))  # first minimum in (n, m) order
        nn, mm = divmod(best, p)
        alive = alive[~zero[nn, mm][alive % p]]
    return alive


def narrow_admissible_tuple(Q: QuadForm, k: int, interval: int = _NARROW_INTERVAL) -> NarrowTuple:
    """Admissible {(0, h_1), ..., (0, h_k)} of small diameter from a greedy sieve.

    The sieved interval does not depend on k, so the survivors for k + 1
    are a subset of those for k and the diameter is non-decreasing in k.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        shifts = ShiftTuple.vertical([0])
        return NarrowTuple(shifts, is_admissible(shifts, Q), interval)
    U = interval
    while True:
        primes = primes_up_to(admissibility_prime_bound(Q, k))
        alive = _greedy_survivors(Q, primes, U)
        if alive.size >= k:
            break
        U *= 2
    widths = alive[k - 1 :] - alive[: alive.size - k + 1]
    i = int(np.argmin(widths))
    hs = alive[i : i + k] - alive[i]
    shifts = ShiftTuple.vertical(hs.tolist())
    cert = is_admissible(shifts, Q)
    if not cert.admissible:
        raise AssertionError(f"greedy tuple blocked at p={cert.blocking_prime}")
    return NarrowTuple(shifts, cert, U)


@dataclass
class GapReport:
    form: tuple[int, int, int]
    theta: float
    delta: float
    d_max: int
    found: bool
    k: int | None
    Mk: float | None
    threshold: float | None
    tuple: NarrowTuple | None
    delta_Q: DeltaQEstimate
    trace: list[tuple[int, float, float]]
    best: MkResult | None = None
    assumptions: list[str] = field(default_factory=list)

    @property
    def cQ(self) -> int | None:
        return self.tuple.diameter if self.tuple else None

    def as_dict(self) -> dict:
        return {
            "form": list(self.form),
            "theta": self.theta,
            "delta": self.delta,
            "dmax": self.d_max,
            "found": self.found,
            "k": self.k,
            "Mk": self.Mk,
            "threshold": self.threshold,
            "tuple": self.tuple.hs if self.tuple else None,
            "cQ": self.cQ,
            "deltaQ_estimate": self.delta_Q.estimate,
            "deltaQ_trace": [list(t) for t in self.delta_Q.trace],
            "witnesses": self.tuple.certificate.as_dict() if self.tuple else None,
            "Mk_coeffs": list(self.best.coeffs) if self.best else None,
            "Mk_basis": [list(b) for b in self.best.basis] if self.best else None,
            "threshold_trace": [list(t) for t in self.trace],
            "comparison_246": None if self.cQ is None else f"c(Q)={self.cQ} vs 246 (logged, not asserted)",
            "assumptions": list(self.assumptions),
        }


def gap_pipeline(
    Q: QuadForm,
    theta: float,
    delta: float,
    d_max: int = 4,
    k_max: int = 60,
    k_min: int = 1,
    delta_Q: DeltaQEstimate | None = None,
) -> GapReport:
    """Least k with threshold > 1, the narrow tuple for that k, and c(Q)."""
    validity = validate_paper_conditions(Q)
    dq = delta_Q or estimate_delta_Q(Q)
    assumptions = [
        f"delta_Q taken as the empirical pi(x,Q) h log x / x at x={dq.trace[-1][0]:g}",
        "sqrt(-Delta) in the threshold read as sqrt(Delta)",
        "M_k is a certified lower bound from a degree-limited polynomial G",
        "c(Q) is a candidate constant conditional on the delta_Q calibration",
    ]
    for name in ("eight_not_dividing", "odd_squarefree", "delta_gt_4"):
        if not getattr(validity, name):
            assumptions.append(f"form fails {name}; pipeline run as an extrapolation")
    assumptions.extend(validity.caveats)
    trace: list[tuple[int, float, float]] = []
    for k in range(k_min, k_max + 1):
        res = maximize_Mk(k, d_max)
        thr = rho_threshold(k, theta, delta, Q, dq.estimate, res.Mk)
        trace.append((k, res.Mk, thr))
        if thr > 1:
            tup = narrow_admissible_tuple(Q, k)
            log.info("c(Q) = %d for %s (reference bound 246 for x^2+y^2)", tup.diameter, Q)
            return GapReport(Q.as_tuple(), theta, delta, d_max, True, k, res.Mk, thr, tup, dq, trace, res, assumptions)
    log.info("no k <= %d with threshold > 1 for %s", k_max, Q)
    return GapReport(Q.as_tuple(), theta, delta, d_max, False, None, None, None, None, dq, trace, None, assumptions)
