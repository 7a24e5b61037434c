"""Exact scalars: rationals (gmpy2.mpq) and Gaussian rationals Q(i).

Everything downstream only uses +, -, *, / and comparison with 0, so the
two scalar kinds can be mixed freely with the linear-algebra helpers.
"""

from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq

ZERO = mpq(0)
ONE = mpq(1)


def Q(num, den=1) -> mpq:
    """Build an exact rational from ints, strings, Fractions or mpq."""
    if isinstance(num, Fraction):
        num = mpq(num.numerator, num.denominator)
    if isinstance(num, str):
        num = mpq(num)
    return mpq(num) / mpq(den)


class Gaussian:
    """Element re + i*im of Q(i), with exact mpq parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is type(ZERO) else mpq(re)
        self.im = im if type(im) is type(ZERO) else mpq(im)

    @staticmethod
    def _coerce(other):
        if isinstance(other, Gaussian):
            return other
        return Gaussian(other, 0)

    def __add__(self, other):
        if isinstance(other, Gaussian):
            return Gaussian(self.re + other.re, self.im + other.im)
        return Gaussian(self.re + other, self.im)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Gaussian):
            return Gaussian(self.re - other.re, self.im - other.im)
        return Gaussian(self.re - other, self.im)

    def __rsub__(self, other):
        return Gaussian(other - self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, Gaussian):
            a, b, c, d = self.re, self.im, other.re, other.im
            return Gaussian(a * c - b * d, a * d + b * c)
        return Gaussian(self.re * other, self.im * other)

    __rmul__ = __mul__

    def __neg__(self):
        return Gaussian(-self.re, -self.im)

    def __pos__(self):
        return self

    def norm(self) -> mpq:
        return self.re * self.re + self.im * self.im

    def conjugate(self) -> "Gaussian":
        return Gaussian(self.re, -self.im)

    def inverse(self) -> "Gaussian":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("Gaussian division by zero")
        return Gaussian(self.re / n, -self.im / n)

    def __truediv__(self, other):
        if isinstance(other, Gaussian):
            return self * other.inverse()
        return Gaussian(self.re / other, self.im / other)

    def __rtruediv__(self, other):
        return Gaussian._coerce(other) * self.inverse()

    def __eq__(self, other):
        if isinstance(other, Gaussian):
            return self.re == other.re and self.im == other.im
        try:
            return self.im == 0 and self.re == other
        except TypeError:
            return NotImplemented

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __repr__(self):
        return f"Gaussian({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


I_UNIT = Gaussian(0, 1)


def is_gaussian(x) -> bool:
    return isinstance(x, Gaussian)


def conj(x):
    return x.conjugate() if isinstance(x, Gaussian) else x


def real_part(x) -> mpq:
    return x.re if isinstance(x, Gaussian) else x


def imag_part(x) -> mpq:
    return x.im if isinstance(x, Gaussian) else ZERO


def to_gaussian(x) -> Gaussian:
    return x if isinstance(x, Gaussian) else Gaussian(x, 0)


def sqrt_rational(x) -> mpq | None:
    """Exact square root of a nonnegative rational, or None."""
    x = mpq(x)
    if x < 0:
        return None
    from gmpy2 import is_square, isqrt

    n, d = x.numerator, x.denominator
    if is_square(n) and is_square(d):
        return mpq(isqrt(n), isqrt(d))
    return None


def sqrt_gaussian(z) -> Gaussian | None:
    """Exact square root of a Gaussian rational when it lies in Q(i).

    Writing w = a + ib with w^2 = z gives a^2 = (|z| + re z)/2 and
    b^2 = (|z| - re z)/2, so everything reduces to rational square roots.
    """
    z = to_gaussian(z)
    if not z:
        return Gaussian(0, 0)
    m = sqrt_rational(z.norm())
    if m is None:
        return None
    a = sqrt_rational((m + z.re) / 2)
    b = sqrt_rational((m - z.re) / 2)
    if a is None or b is None:
        return None
    if a == 0:
        w = Gaussian(0, b)
    else:
        w = Gaussian(a, z.im / (2 * a))
    if w * w != z:
        w = Gaussian(a, -b)
        if w * w != z:
            return None
    return w


# JSON codec -----------------------------------------------------------------

def encode_scalar(x):
    """[num, den] for rationals, [[num, den], [num, den]] for Gaussians."""
    if isinstance(x, Gaussian):
        return [encode_scalar(x.re), encode_scalar(x.im)]
    x = mpq(x)
    return [int(x.numerator), int(x.denominator)]


def decode_scalar(obj):
    if isinstance(obj, (int,)) and not isinstance(obj, bool):
        return mpq(obj)
    if isinstance(obj, str):
        return mpq(obj)
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise ValueError(f"malformed scalar {obj!r}")
    a, b = obj
    if isinstance(a, (list, tuple)):
        return Gaussian(decode_scalar(a), decode_scalar(b))
    if not isinstance(a, int) or not isinstance(b, int) or isinstance(a, bool) or isinstance(b, bool):
        raise ValueError(f"malformed rational {obj!r}")
    if b == 0:
        raise ValueError("zero denominator")
    return mpq(a, b)


def scalar_str(x) -> str:
    return str(x)
