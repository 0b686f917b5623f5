"""Exact arithmetic in Z[sqrt2], the octagonal module and the pentagonal module.

Everything here is immutable and uses Python integers, so values never
overflow.  Floating point only appears in the explicit ``*_float`` views.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

SQRT2 = math.sqrt(2.0)
HALF_SQRT2 = SQRT2 / 2.0


def _sign_parts(a: int, b: int) -> int:
    # sign of a + b*sqrt2 from integer comparisons only
    if b == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return (b > 0) - (b < 0)
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    # opposite signs: the term with the larger square wins
    lhs, rhs = a * a, 2 * b * b
    if lhs == rhs:  # impossible for integers unless both vanish
        return 0
    if a > 0:
        return 1 if lhs > rhs else -1
    return -1 if lhs > rhs else 1


@total_ordering
@dataclass(frozen=True, slots=True)
class QuadInt:
    """The number a + b*sqrt2 with integer a and b."""

    a: int = 0
    b: int = 0

    @classmethod
    def coerce(cls, x: int | QuadInt) -> QuadInt:
        if isinstance(x, QuadInt):
            return x
        if isinstance(x, int):
            return cls(x, 0)
        raise TypeError(f"cannot coerce {type(x).__name__} to QuadInt")

    def __add__(self, other: int | QuadInt) -> QuadInt:
        o = QuadInt.coerce(other)
        return QuadInt(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> QuadInt:
        return QuadInt(-self.a, -self.b)

    def __sub__(self, other: int | QuadInt) -> QuadInt:
        o = QuadInt.coerce(other)
        return QuadInt(self.a - o.a, self.b - o.b)

    def __rsub__(self, other: int | QuadInt) -> QuadInt:
        return QuadInt.coerce(other) - self

    def __mul__(self, other: int | QuadInt) -> QuadInt:
        o = QuadInt.coerce(other)
        return QuadInt(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> QuadInt:
        if n < 0:
            raise ValueError("negative powers are not in the ring")
        out, base = QuadInt(1, 0), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __lt__(self, other: int | QuadInt) -> bool:
        return qsign(self - QuadInt.coerce(other)) < 0

    def __bool__(self) -> bool:
        return self.a != 0 or self.b != 0

    def conj(self) -> QuadInt:
        return QuadInt(self.a, -self.b)

    def norm(self) -> int:
        """Field norm a^2 - 2b^2; units have norm +-1."""
        return self.a * self.a - 2 * self.b * self.b

    def __float__(self) -> float:
        return self.a + self.b * SQRT2

    def __repr__(self) -> str:
        return f"QuadInt({self.a}, {self.b})"

    def __str__(self) -> str:
        return f"{self.a}{self.b:+}√2"


ALPHA = QuadInt(1, 1)  # silver mean 1 + sqrt2
SQRT2_Q = QuadInt(0, 1)


def qsign(x: QuadInt) -> int:
    """Sign of a + b*sqrt2 without floating point."""
    return _sign_parts(x.a, x.b)


def star1d(x: QuadInt) -> QuadInt:
    """Galois conjugation sqrt2 -> -sqrt2."""
    return x.conj()


def compare_fraction(x: QuadInt, q: Fraction) -> int:
    """Exact sign of x - q for a rational q."""
    q = Fraction(q)
    return _sign_parts(q.denominator * x.a - q.numerator, q.denominator * x.b)


@total_ordering
@dataclass(frozen=True, slots=True)
class QuadHalf:
    """The number num / 2 with num in Z[sqrt2]."""

    num: QuadInt = QuadInt()

    @classmethod
    def of(cls, a: int, b: int) -> QuadHalf:
        return cls(QuadInt(a, b))

    @classmethod
    def coerce(cls, x: int | QuadInt | QuadHalf) -> QuadHalf:
        if isinstance(x, QuadHalf):
            return x
        return cls(QuadInt.coerce(x) * 2)

    def __add__(self, other: int | QuadInt | QuadHalf) -> QuadHalf:
        return QuadHalf(self.num + QuadHalf.coerce(other).num)

    __radd__ = __add__

    def __neg__(self) -> QuadHalf:
        return QuadHalf(-self.num)

    def __sub__(self, other: int | QuadInt | QuadHalf) -> QuadHalf:
        return QuadHalf(self.num - QuadHalf.coerce(other).num)

    def __rsub__(self, other: int | QuadInt | QuadHalf) -> QuadHalf:
        return QuadHalf.coerce(other) - self

    def __mul__(self, other: int | QuadInt) -> QuadHalf:
        if isinstance(other, QuadHalf):
            raise TypeError("QuadHalf * QuadHalf leaves the half-integer ring")
        return QuadHalf(self.num * QuadInt.coerce(other))

    __rmul__ = __mul__

    def __lt__(self, other: int | QuadInt | QuadHalf) -> bool:
        return qsign((self - other).num) < 0

    def sign(self) -> int:
        return qsign(self.num)

    def __abs__(self) -> QuadHalf:
        return -self if self.sign() < 0 else self

    def __float__(self) -> float:
        return float(self.num) / 2.0

    def __repr__(self) -> str:
        return f"QuadHalf({self.num.a}, {self.num.b})"


Vec2 = tuple[QuadHalf, QuadHalf]


@dataclass(frozen=True, slots=True)
class OctaCoord:
    """Integer combination u1*a1 + ... + u4*a4 of the unit vectors a_i at (i-1)*45 degrees.

    Equivalently an element of Z[zeta8] with zeta8 = a2.  The internal
    embedding uses the unit vectors at (i-1)*135 degrees, i.e. the Galois
    conjugation zeta8 -> zeta8^3.
    """

    u1: int = 0
    u2: int = 0
    u3: int = 0
    u4: int = 0

    @classmethod
    def of(cls, u: tuple[int, int, int, int] | list[int]) -> OctaCoord:
        u1, u2, u3, u4 = (int(c) for c in u)
        return cls(u1, u2, u3, u4)

    @classmethod
    def unit(cls, k: int) -> OctaCoord:
        """zeta8**k, the unit vector at k*45 degrees."""
        k %= 8
        sgn = 1 if k < 4 else -1
        u = [0, 0, 0, 0]
        u[k % 4] = sgn
        return cls.of(u)

    @property
    def coeffs(self) -> tuple[int, int, int, int]:
        return (self.u1, self.u2, self.u3, self.u4)

    def __add__(self, o: OctaCoord) -> OctaCoord:
        return OctaCoord(self.u1 + o.u1, self.u2 + o.u2, self.u3 + o.u3, self.u4 + o.u4)

    def __sub__(self, o: OctaCoord) -> OctaCoord:
        return OctaCoord(self.u1 - o.u1, self.u2 - o.u2, self.u3 - o.u3, self.u4 - o.u4)

    def __neg__(self) -> OctaCoord:
        return OctaCoord(-self.u1, -self.u2, -self.u3, -self.u4)

    def scale(self, k: int) -> OctaCoord:
        return OctaCoord(k * self.u1, k * self.u2, k * self.u3, k * self.u4)

    def sigma(self) -> OctaCoord:
        """Coefficient shift: rotates phys by 45 degrees and internal by 135 degrees."""
        return OctaCoord(-self.u4, self.u1, self.u2, self.u3)

    def rotate(self, k: int) -> OctaCoord:
        out = self
        for _ in range(k % 8):
            out = out.sigma()
        return out

    def __mul__(self, o: OctaCoord) -> OctaCoord:
        # ring product in Z[zeta8] with zeta^4 = -1
        acc = [0, 0, 0, 0]
        for i, x in enumerate(self.coeffs):
            if not x:
                continue
            for j, y in enumerate(o.coeffs):
                if not y:
                    continue
                k = i + j
                if k >= 4:
                    acc[k - 4] -= x * y
                else:
                    acc[k] += x * y
        return OctaCoord.of(acc)

    def mul_quad(self, q: QuadInt) -> OctaCoord:
        """Multiply by a + b*sqrt2, using sqrt2 = zeta - zeta^3."""
        return self.scale(q.a) + (self * SQRT2_OCTA).scale(q.b)

    def phys(self) -> Vec2:
        u1, u2, u3, u4 = self.coeffs
        return (QuadHalf.of(2 * u1, u2 - u4), QuadHalf.of(2 * u3, u2 + u4))

    def internal(self) -> Vec2:
        u1, u2, u3, u4 = self.coeffs
        return (QuadHalf.of(2 * u1, u4 - u2), QuadHalf.of(-2 * u3, u2 + u4))

    def phys_float(self) -> tuple[float, float]:
        u1, u2, u3, u4 = self.coeffs
        return (u1 + (u2 - u4) * HALF_SQRT2, u3 + (u2 + u4) * HALF_SQRT2)

    def internal_float(self) -> tuple[float, float]:
        u1, u2, u3, u4 = self.coeffs
        return (u1 + (u4 - u2) * HALF_SQRT2, -u3 + (u2 + u4) * HALF_SQRT2)

    def __repr__(self) -> str:
        return f"OctaCoord{self.coeffs}"


SQRT2_OCTA = OctaCoord(0, 1, 0, -1)
ALPHA_OCTA = OctaCoord(1, 1, 0, -1)


def embed_octa(x: OctaCoord) -> tuple[Vec2, Vec2]:
    """(physical, internal) exact embeddings of a module point."""
    return x.phys(), x.internal()


# Rows (a_i, a_i*) of the 4x4 embedding matrix.  Its rows are orthogonal with
# squared length 2, so the inverse is the transpose divided by 2.
EMBED_MATRIX = (
    (1.0, 0.0, 1.0, 0.0),
    (HALF_SQRT2, HALF_SQRT2, -HALF_SQRT2, HALF_SQRT2),
    (0.0, 1.0, 0.0, -1.0),
    (-HALF_SQRT2, HALF_SQRT2, HALF_SQRT2, HALF_SQRT2),
)


@dataclass(frozen=True, slots=True)
class PentaCoord:
    """Integer combination u1*z + u2*z^2 + u3*z^3 + u4*z^4, z = exp(2 pi i / 5).

    The constant 1 is -(z + z^2 + z^3 + z^4), so these four coefficients
    cover the whole ring Z[z] uniquely.
    """

    u1: int = 0
    u2: int = 0
    u3: int = 0
    u4: int = 0

    @classmethod
    def of(cls, u: tuple[int, int, int, int] | list[int]) -> PentaCoord:
        u1, u2, u3, u4 = (int(c) for c in u)
        return cls(u1, u2, u3, u4)

    @classmethod
    def one(cls) -> PentaCoord:
        return cls(-1, -1, -1, -1)

    @classmethod
    def unit10(cls, k: int) -> PentaCoord:
        """The tenth root of unity exp(i pi k / 5), using zeta10 = -z^3."""
        k %= 10
        zk = cls.one()
        for _ in range((3 * k) % 5):
            zk = zk.mul_zeta()
        return -zk if k % 2 else zk

    @property
    def coeffs(self) -> tuple[int, int, int, int]:
        return (self.u1, self.u2, self.u3, self.u4)

    def __add__(self, o: PentaCoord) -> PentaCoord:
        return PentaCoord(self.u1 + o.u1, self.u2 + o.u2, self.u3 + o.u3, self.u4 + o.u4)

    def __sub__(self, o: PentaCoord) -> PentaCoord:
        return PentaCoord(self.u1 - o.u1, self.u2 - o.u2, self.u3 - o.u3, self.u4 - o.u4)

    def __neg__(self) -> PentaCoord:
        return PentaCoord(-self.u1, -self.u2, -self.u3, -self.u4)

    def scale(self, k: int) -> PentaCoord:
        return PentaCoord(k * self.u1, k * self.u2, k * self.u3, k * self.u4)

    def mul_zeta(self) -> PentaCoord:
        u1, u2, u3, u4 = self.coeffs
        return PentaCoord(-u4, u1 - u4, u2 - u4, u3 - u4)

    def __mul__(self, o: PentaCoord) -> PentaCoord:
        out = PentaCoord()
        zk = o
        for c in self.coeffs:
            zk = zk.mul_zeta()
            if c:
                out = out + zk.scale(c)
        return out

    def mul_tau(self) -> PentaCoord:
        """Multiply by the golden mean tau = -z^2 - z^3."""
        z2 = self.mul_zeta().mul_zeta()
        return -(z2 + z2.mul_zeta())

    def phys_float(self) -> tuple[float, float]:
        x = y = 0.0
        for k, c in enumerate(self.coeffs, start=1):
            x += c * math.cos(2 * math.pi * k / 5)
            y += c * math.sin(2 * math.pi * k / 5)
        return (x, y)

    def __repr__(self) -> str:
        return f"PentaCoord{self.coeffs}"


def zeta_matrix(n_roots: int):
    """Integer 4x4 matrix of multiplication by the generating root on coefficient columns."""
    import numpy as np

    if n_roots == 8:
        return np.array(
            [[0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]], dtype=np.int64
        )
    if n_roots == 5:
        return np.array(
            [[0, 0, 0, -1], [1, 0, 0, -1], [0, 1, 0, -1], [0, 0, 1, -1]], dtype=np.int64
        )
    raise ValueError(n_roots)


def qsign_array(a, b):
    """Vectorised exact sign of a + b*sqrt2 for int64 arrays (|a|, |b| < 2**31)."""
    import numpy as np

    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    sa, sb = np.sign(a), np.sign(b)
    mixed = np.sign(a * a - 2 * b * b) * sa
    return np.where(sa == sb, sa, np.where(sa == 0, sb, np.where(sb == 0, sa, mixed)))
