"""Bulk enumeration of lattice points under Q(m, n) <= X.

Includes residue-restricted counts, prime-valued point counts pi(x, Q) and
the discrepancy sum

    D(x, theta) = sum_{q < x^theta} max_{(u,v)} max_{y <= x}
                  |pi(y, Q; q, u, v) - pi(y, Q) / nu(q)|,

with the maximum over y taken on a geometric grid.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .arith import is_prime, is_prime_array
from .errors import CostGuardError
from .forms import QuadForm, UnimodularMatrix, sl2_transform
from .idealarith import coprime_class_mask

DEFAULT_POINT_BUDGET = 6 * 10**7
_CHUNK_POINTS = 4 * 10**6


@dataclass(frozen=True)
class LatticeWindow:
    X: float
    m_bound: int
    n_bound: int


def lattice_window(Q: QuadForm, X: float) -> LatticeWindow:
    """Box containing every (m, n) with Q(m, n) <= X."""
    D = Q.delta
    return LatticeWindow(
        X,
        math.isqrt(int(4 * Q.c * max(X, 0) // D)) + 1,
        math.isqrt(int(4 * Q.a * max(X, 0) // D)) + 1,
    )


def expected_points(Q: QuadForm, X: float) -> float:
    """Area of the ellipse Q <= X, i.e. 2 pi X / sqrt(Delta)."""
    return 2 * math.pi * X / math.sqrt(Q.delta)


def _m_interval(Q: QuadForm, n: np.ndarray, Xi: int):
    a, b, c, D = Q.a, Q.b, Q.c, Q.delta
    disc = np.maximum(4 * a * Xi - D * n * n, 0).astype(np.float64)
    root = np.sqrt(disc)
    lo = np.ceil((-b * n - root) / (2 * a)).astype(np.int64)
    hi = np.floor((-b * n + root) / (2 * a)).astype(np.int64)

    def val(m):
        return a * m * m + b * m * n + c * n * n

    # float roots can be off by one at the boundary
    for _ in range(2):
        lo = np.where(val(lo - 1) <= Xi, lo - 1, lo)
        lo = np.where(val(lo) > Xi, lo + 1, lo)
        hi = np.where(val(hi + 1) <= Xi, hi + 1, hi)
        hi = np.where(val(hi) > Xi, hi - 1, hi)
    return lo, hi


def iter_points(Q: QuadForm, X: float, budget: int = DEFAULT_POINT_BUDGET):
    """Yield chunks (m, n, value) covering all points with Q(m, n) <= X.

    Rows are ordered by n; within a row by m.
    """
    if X < 0:
        return
    Xi = int(math.floor(X))
    if expected_points(Q, X) > budget:
        raise CostGuardError(
            f"about {expected_points(Q, X):.3g} lattice points exceed budget {budget}"
        )
    if 8 * Q.a * max(Q.a, Q.c) * (Xi + 1) > 2**62:
        raise OverflowError("window too large for int64 enumeration")
    nb = lattice_window(Q, X).n_bound
    n_all = np.arange(-nb, nb + 1, dtype=np.int64)
    lo, hi = _m_interval(Q, n_all, Xi)
    counts = np.maximum(hi - lo + 1, 0)
    start = 0
    while start < n_all.size:
        csum = np.cumsum(counts[start:])
        stop = start + max(1, int(np.searchsorted(csum, _CHUNK_POINTS)))
        cnt = counts[start:stop]
        total = int(cnt.sum())
        if total:
            n = np.repeat(n_all[start:stop], cnt)
            offs = np.repeat(np.cumsum(cnt) - cnt, cnt)
            m = np.repeat(lo[start:stop], cnt) + (np.arange(total) - offs)
            v = Q.a * m * m + Q.b * m * n + Q.c * n * n
            yield m, n, v
        start = stop


def count_lattice(Q: QuadForm, X: float, q: int = 1, u: int = 0, v: int = 0) -> int:
    """Exact #{(m, n) : Q(m, n) <= X, m = u, n = v (mod q)}."""
    q = int(q)
    if q < 1:
        raise ValueError("q must be >= 1")
    total = 0
    for m, n, _ in iter_points(Q, X):
        total += int(np.count_nonzero(((m - u) % q == 0) & ((n - v) % q == 0)))
    return total


def residue_count_table(Q: QuadForm, X: float, q: int) -> np.ndarray:
    """q x q table of lattice counts by residue class (u, v)."""
    out = np.zeros(q * q, dtype=np.int64)
    for m, n, _ in iter_points(Q, X):
        out += np.bincount((m % q) * q + (n % q), minlength=q * q)
    return out.reshape(q, q)


@lru_cache(maxsize=8)
def _prime_points_cached(a: int, b: int, c: int, x: int):
    Q = QuadForm(a, b, c)
    ms, ns, vs = [], [], []
    for m, n, v in iter_points(Q, x):
        keep = is_prime_array(v)
        ms.append(m[keep])
        ns.append(n[keep])
        vs.append(v[keep])
    m = np.concatenate(ms) if ms else np.zeros(0, dtype=np.int64)
    n = np.concatenate(ns) if ns else np.zeros(0, dtype=np.int64)
    v = np.concatenate(vs) if vs else np.zeros(0, dtype=np.int64)
    order = np.argsort(v, kind="stable")
    out = (m[order], n[order], v[order])
    for arr in out:
        arr.setflags(write=False)
    return out


def prime_points(Q: QuadForm, x: float):
    """Arrays (m, n, value) of all points with Q(m, n) <= x prime, sorted by value."""
    return _prime_points_cached(Q.a, Q.b, Q.c, int(math.floor(max(x, 0))))


def pi_Q(Q: QuadForm, x: float) -> int:
    """Number of (m, n) with Q(m, n) <= x and Q(m, n) prime."""
    if x < 2:
        return 0
    return int(prime_points(Q, x)[2].size)


def pi_Q_residue(Q: QuadForm, x: float, q: int, u: int, v: int) -> int:
    if x < 2:
        return 0
    m, n, _ = prime_points(Q, x)
    return int(np.count_nonzero(((m - u) % q == 0) & ((n - v) % q == 0)))


def geometric_grid(x: float, per_decade: int = 64, y_min: float = 2.0) -> np.ndarray:
    """Geometric grid of y values in [y_min, x] with the endpoint x included."""
    if x <= y_min:
        return np.array([float(x)])
    npts = max(2, int(math.ceil(math.log10(x / y_min) * per_decade)) + 1)
    grid = y_min * (x / y_min) ** (np.arange(npts) / (npts - 1))
    grid[-1] = x
    return grid


def normalizing_transform(Q: QuadForm, bound: int, search: int = 200):
    """Find M with (Q o M)(1, 0) a prime exceeding ``bound``.

    The discrepancy sum is invariant under this change of variables; it only
    mirrors the normalisation Q(1, 0) prime and coprime to every modulus.
    """
    best = None
    for p in range(1, search):
        for r in range(-search, search):
            if math.gcd(p, r) != 1:
                continue
            val = Q.a * p * p + Q.b * p * r + Q.c * r * r
            if val > bound and is_prime(val) and (best is None or val < best[0]):
                best = (val, p, r)
        if best is not None and best[0] < Q.a * p * p:
            break
    if best is None:
        raise ValueError("no prime value found in search range")
    _, p, r = best
    # complete (p, r) to a unimodular matrix: p s - q r = 1
    g, s, mq = _egcd(p, r)
    return UnimodularMatrix(p, -mq, r, s)


def _egcd(a: int, b: int):
    """Return (g, x, y) with a x + b y = g."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        k = a // b
        a, b = b, a - k * b
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class BVRow:
    q: int
    nu_q: int
    argmax_u: int
    argmax_v: int
    argmax_y: float
    discrepancy: float
    regime: str


@dataclass
class BVResult:
    form: tuple[int, int, int]
    x: float
    theta: float
    total: float
    rows: list[BVRow] = field(default_factory=list)
    grid_points: int = 0
    transform: tuple[int, int, int, int] | None = None

    @property
    def normalized(self) -> float:
        """D (log x)^2 / x."""
        return self.total * math.log(self.x) ** 2 / self.x


def _bv_for_modulus(q, m, n, bins, grid_size, pi_y, Q, exact_q_max, samples, seed):
    mask = coprime_class_mask(Q, q)
    nu_q = int(mask.sum())
    admissible = np.flatnonzero(mask.ravel())
    regime = "exact"
    if q > exact_q_max and admissible.size > samples:
        rng = np.random.default_rng([seed, q])
        admissible = np.sort(rng.choice(admissible, size=samples, replace=False))
        regime = "sampled"
    cls = (m % q) * q + (n % q)
    pos = np.searchsorted(admissible, cls)
    pos = np.minimum(pos, admissible.size - 1)
    hit = admissible[pos] == cls
    hist = np.bincount(pos[hit] * grid_size + bins[hit], minlength=admissible.size * grid_size)
    counts = np.cumsum(hist.reshape(admissible.size, grid_size), axis=1)
    dev = np.abs(counts - pi_y[None, :] / nu_q)
    flat = int(np.argmax(dev))
    i, j = divmod(flat, grid_size)
    u, v = divmod(int(admissible[i]), q)
    return BVRow(q, nu_q, u, v, float(j), float(dev[i, j]), regime)


def bv_discrepancy_sum(
    Q: QuadForm,
    x: float,
    theta: float,
    grid_per_decade: int = 64,
    exact_q_max: int = 100,
    samples: int = 1024,
    seed: int = 0,
    workers: int = 1,
    budget: int = DEFAULT_POINT_BUDGET,
    normalize: bool = False,
) -> BVResult:
    """Evaluate D(x, theta); rows are returned in increasing q."""
    if theta > 0.5:
        raise ValueError("theta must be at most 1/2")
    if expected_points(Q, x) > budget:
        raise CostGuardError(f"x={x:g} exceeds the lattice point budget {budget}")
    form = Q.as_tuple()
    transform = None
    if normalize:
        M = normalizing_transform(Q, int(x**theta) + 1)
        Q = sl2_transform(Q, M)
        transform = M.as_tuple()
    qs = [q for q in range(1, int(math.ceil(x**theta))) if q < x**theta]
    m, n, val = prime_points(Q, x)
    grid = geometric_grid(x, grid_per_decade)
    # bin j collects values in (grid[j-1], grid[j]]; cumsum over j gives counts at y = grid[j]
    bins = np.searchsorted(grid, val, side="left")
    inside = bins < grid.size
    m, n, bins = m[inside], n[inside], bins[inside]
    pi_y = np.cumsum(np.bincount(bins, minlength=grid.size))

    def work(q):
        return _bv_for_modulus(
            q, m, n, bins, grid.size, pi_y, Q, exact_q_max, samples, seed
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(work, qs))
    else:
        rows = [work(q) for q in qs]
    rows = [
        BVRow(r.q, r.nu_q, r.argmax_u, r.argmax_v, float(grid[int(r.argmax_y)]), r.discrepancy, r.regime)
        for r in rows
    ]
    total = math.fsum(r.discrepancy for r in rows)
    return BVResult(
        form, float(x), float(theta), total, rows, int(grid.size), transform
    )
