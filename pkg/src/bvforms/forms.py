"""Primitive positive definite binary quadratic forms ax^2 + bxy + cy^2."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .arith import factorize
from .errors import FormError

INT128_MAX = 2**127 - 1


def _check_width(*values: int) -> None:
    for v in values:
        if abs(v) > INT128_MAX:
            raise OverflowError(f"intermediate {v} exceeds signed 128-bit range")


@dataclass(frozen=True)
class QuadForm:
    a: int
    b: int
    c: int

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                try:
                    iv = int(v)
                except (TypeError, ValueError):
                    raise FormError(f"coefficient {name}={v!r} is not an integer") from None
                if iv != v:
                    raise FormError(f"coefficient {name}={v!r} is not an integer")
                object.__setattr__(self, name, iv)
        _check_width(self.a, self.b, self.c)
        if self.a <= 0 or self.b * self.b - 4 * self.a * self.c >= 0:
            raise FormError(f"{self} is not positive definite")
        if math.gcd(self.a, self.b, self.c) != 1:
            raise FormError(f"{self} is not primitive")

    @classmethod
    def parse(cls, text: str) -> "QuadForm":
        """Parse the literal ``"a,b,c"``."""
        parts = [p.strip() for p in str(text).split(",")]
        if len(parts) != 3:
            raise FormError(f"form literal {text!r} must look like 'a,b,c'")
        try:
            a, b, c = (int(p) for p in parts)
        except ValueError:
            raise FormError(f"form literal {text!r} has non-integer entries") from None
        return cls(a, b, c)

    @property
    def delta(self) -> int:
        """Delta = 4ac - b^2 > 0, so that the discriminant is -Delta."""
        return 4 * self.a * self.c - self.b * self.b

    def __call__(self, m: int, n: int) -> int:
        return evaluate(self, m, n)

    def __str__(self):
        return f"{self.a},{self.b},{self.c}"

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)


def is_fundamental(delta: int) -> bool:
    """Whether -delta is a fundamental discriminant (delta > 0)."""
    if delta <= 0:
        return False
    if delta % 4 == 3:
        return all(e == 1 for e in factorize(delta).values())
    if delta % 16 in (4, 8):
        d4 = delta // 4
        return d4 % 4 in (1, 2) and all(e == 1 for e in factorize(d4).values())
    return False


def _odd_squarefree(delta: int) -> bool:
    return all(e == 1 for p, e in factorize(delta).items() if p != 2)


@dataclass(frozen=True)
class Discriminant:
    delta: int
    fundamental: bool = field(init=False)
    standing_condition: bool = field(init=False)

    def __post_init__(self):
        if self.delta <= 0 or self.delta % 4 not in (0, 3):
            raise FormError(f"-{self.delta} is not a negative form discriminant")
        object.__setattr__(self, "fundamental", is_fundamental(self.delta))
        # 8 does not divide delta and no odd prime square divides delta
        object.__setattr__(
            self, "standing_condition", self.delta % 8 != 0 and _odd_squarefree(self.delta)
        )


def discriminant(Q: QuadForm) -> Discriminant:
    return Discriminant(Q.delta)


def evaluate(Q: QuadForm, m: int, n: int) -> int:
    m, n = int(m), int(n)
    _check_width(m, n, m * m, n * n, m * n)
    value = Q.a * m * m + Q.b * m * n + Q.c * n * n
    _check_width(value)
    return value


@dataclass(frozen=True)
class ValidityReport:
    form: tuple[int, int, int]
    delta: int
    primitive: bool
    positive_definite: bool
    eight_not_dividing: bool
    odd_squarefree: bool
    delta_gt_4: bool
    caveats: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return all(
            (
                self.primitive,
                self.positive_definite,
                self.eight_not_dividing,
                self.odd_squarefree,
                self.delta_gt_4,
            )
        )

    def as_dict(self) -> dict:
        return {
            "form": list(self.form),
            "delta": self.delta,
            "primitive": self.primitive,
            "positive_definite": self.positive_definite,
            "eight_not_dividing_delta": self.eight_not_dividing,
            "odd_squarefree_delta": self.odd_squarefree,
            "delta_gt_4": self.delta_gt_4,
            "all_conditions": self.ok,
            "caveats": list(self.caveats),
        }


def validate_paper_conditions(Q) -> ValidityReport:
    """Report (never raise) which standing hypotheses a triple satisfies.

    Accepts a :class:`QuadForm` or any (a, b, c) integer triple, so that
    degenerate input can still be described.
    """
    a, b, c = (int(v) for v in (Q.as_tuple() if isinstance(Q, QuadForm) else Q))
    delta = 4 * a * c - b * b
    definite = a > 0 and delta > 0
    caveats = []
    if definite and delta <= 4:
        caveats.append(
            f"Delta={delta}: unit group larger than {{+1,-1}}; sieve constants assume units +-1"
        )
    if definite and delta % 8 == 0:
        caveats.append("8 divides Delta")
    return ValidityReport(
        form=(a, b, c),
        delta=delta,
        primitive=math.gcd(a, b, c) == 1,
        positive_definite=definite,
        eight_not_dividing=delta % 8 != 0 if delta > 0 else False,
        odd_squarefree=_odd_squarefree(delta) if delta > 0 else False,
        delta_gt_4=delta > 4,
        caveats=tuple(caveats),
    )


@dataclass(frozen=True)
class UnimodularMatrix:
    """Integer matrix [[p, q], [r, s]] with ps - qr = 1 acting on column vectors."""

    p: int
    q: int
    r: int
    s: int

    def __post_init__(self):
        if self.p * self.s - self.q * self.r != 1:
            raise FormError(f"{self} does not have determinant 1")

    @classmethod
    def identity(cls) -> "UnimodularMatrix":
        return cls(1, 0, 0, 1)

    def inverse(self) -> "UnimodularMatrix":
        return UnimodularMatrix(self.s, -self.q, -self.r, self.p)

    def __matmul__(self, other: "UnimodularMatrix") -> "UnimodularMatrix":
        return UnimodularMatrix(
            self.p * other.p + self.q * other.r,
            self.p * other.q + self.q * other.s,
            self.r * other.p + self.s * other.r,
            self.r * other.q + self.s * other.s,
        )

    def apply(self, x: int, y: int) -> tuple[int, int]:
        return self.p * x + self.q * y, self.r * x + self.s * y

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.p, self.q, self.r, self.s)


def sl2_transform(Q: QuadForm, M: UnimodularMatrix) -> QuadForm:
    """Return Q o M, i.e. the form (x, y) -> Q(px + qy, rx + sy)."""
    if not isinstance(M, UnimodularMatrix):
        M = UnimodularMatrix(*M)
    a, b, c = Q.a, Q.b, Q.c
    p, q, r, s = M.p, M.q, M.r, M.s
    return QuadForm(
        a * p * p + b * p * r + c * r * r,
        2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
        a * q * q + b * q * s + c * s * s,
    )


def is_reduced(Q: QuadForm) -> bool:
    a, b, c = Q.as_tuple()
    if not (abs(b) <= a <= c):
        return False
    if (abs(b) == a or a == c) and b < 0:
        return False
    return True


def reduce_form(Q: QuadForm) -> tuple[QuadForm, UnimodularMatrix]:
    """Gauss reduction; returns the reduced form R and M with R = Q o M."""
    M = UnimodularMatrix.identity()
    R = Q
    while True:
        a, b = R.a, R.b
        # translate b into (-a, a]
        t = (a - b) // (2 * a)
        if t:
            T = UnimodularMatrix(1, t, 0, 1)
            R, M = sl2_transform(R, T), M @ T
        if R.a > R.c:
            S = UnimodularMatrix(0, -1, 1, 0)
            R, M = sl2_transform(R, S), M @ S
            continue
        if R.a == R.c and R.b < 0:
            S = UnimodularMatrix(0, -1, 1, 0)
            R, M = sl2_transform(R, S), M @ S
        return R, M


@dataclass(frozen=True)
class ClassGroupForms:
    delta: int
    forms: tuple[QuadForm, ...]

    @property
    def h(self) -> int:
        return len(self.forms)


def class_number(delta) -> ClassGroupForms:
    """Enumerate the reduced primitive forms of discriminant -delta."""
    d = delta if isinstance(delta, Discriminant) else Discriminant(int(delta))
    D = d.delta
    forms = []
    a_max = math.isqrt(D // 3)
    for a in range(1, a_max + 1):
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b + D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (a == c and b < 0):
                continue
            if math.gcd(a, b, c) != 1:
                continue
            forms.append(QuadForm(a, b, c))
    return ClassGroupForms(D, tuple(forms))
