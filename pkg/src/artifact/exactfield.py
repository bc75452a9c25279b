"""Exact arithmetic over Gaussian rationals and the projective line.

Scalars are elements of Q(i), stored as two reduced integer fractions.
Points of the projective line are homogeneous pairs [a : b]; infinity is
[1 : 0] and is never a special flag.  The cross ratio is computed on
homogeneous pairs, so degenerate 2|2 coincidence patterns fall out of the
algebra instead of needing case analysis.
"""

from __future__ import annotations

import re
from fractions import Fraction

try:  # fast exact rationals when available; Fraction otherwise
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction


class ExactFieldError(Exception):
    """Base class for arithmetic errors in this module."""


class DivisionByZero(ExactFieldError):
    pass


class UnstableConfiguration(ExactFieldError):
    """Three or more coincident inputs to a cross ratio."""


class IndeterminateProduct(ExactFieldError):
    """A projective product of the form 0 * inf."""


class ParseError(ExactFieldError):
    pass


_FRAC_RE = r"[+-]?\d+(?:/\d+)?"
_GR_RE = re.compile(
    r"^\s*(?P<re>" + _FRAC_RE + r")\s*(?P<im>[+-]\s*" + _FRAC_RE.lstrip("[+-]?") + r")?\s*"
    r"(?(im)\*i)\s*$"
)


class GaussRat:
    """A Gaussian rational re + im*i with exact Fraction components."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _Q(re))
        object.__setattr__(self, "im", _Q(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussRat is immutable")

    # reduced-fraction field access per the documented layout
    @property
    def re_num(self):
        return int(self.re.numerator)

    @property
    def re_den(self):
        return int(self.re.denominator)

    @property
    def im_num(self):
        return int(self.im.numerator)

    @property
    def im_den(self):
        return int(self.im.denominator)

    def __add__(self, other):
        other = _coerce(other)
        return GaussRat(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        other = _coerce(other)
        return GaussRat(self.re - other.re, self.im - other.im)

    def __mul__(self, other):
        other = _coerce(other)
        return GaussRat(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __truediv__(self, other):
        other = _coerce(other)
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise DivisionByZero("division by zero GaussRat")
        return GaussRat(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return _coerce(other) - self

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def conj(self):
        return GaussRat(self.re, -self.im)

    def is_zero(self):
        return self.re == 0 and self.im == 0

    def is_real(self):
        return self.im == 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GaussRat(other)
        if not isinstance(other, GaussRat):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero()

    def serialize(self) -> str:
        # canonical text form "a/b+c/d*i", exact round-trip
        im = self.im
        sign = "+" if im >= 0 else "-"
        return "{}/{}{}{}/{}*i".format(
            self.re.numerator, self.re.denominator, sign, abs(im.numerator), im.denominator
        )

    @staticmethod
    def parse(s: str) -> "GaussRat":
        m = _GR_RE.match(s)
        if m is None:
            raise ParseError("bad GaussRat literal: %r" % (s,))
        re_part = Fraction(m.group("re"))
        im_txt = m.group("im")
        im_part = Fraction(im_txt.replace(" ", "")) if im_txt else Fraction(0)
        return GaussRat(re_part, im_part)

    def __repr__(self):
        return "GaussRat(%r)" % (self.serialize(),)


def _coerce(x) -> GaussRat:
    if isinstance(x, GaussRat):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussRat(x)
    raise TypeError("cannot coerce %r to GaussRat" % (x,))


ZERO = GaussRat(0)
ONE = GaussRat(1)
I = GaussRat(0, 1)


class ProjPoint:
    """A point [a : b] of the projective line over Q(i).

    Normal form: b = 1 for finite points, [1 : 0] for infinity.
    """

    __slots__ = ("a", "b")

    def __init__(self, a, b=ONE):
        a = _coerce(a)
        b = _coerce(b)
        if b.is_zero():
            if a.is_zero():
                raise ExactFieldError("[0:0] is not a projective point")
            a, b = ONE, ZERO
        else:
            a, b = a / b, ONE
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __setattr__(self, name, value):
        raise AttributeError("ProjPoint is immutable")

    def is_infinity(self):
        return self.b.is_zero()

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        # cross-multiplication equality; normal form makes it componentwise
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def conj(self):
        return ProjPoint(self.a.conj(), self.b.conj())

    def mul(self, other: "ProjPoint") -> "ProjPoint":
        """Projective product [a:b]*[c:d] = [ac:bd]; 0*inf is an error."""
        na = self.a * other.a
        nb = self.b * other.b
        if na.is_zero() and nb.is_zero():
            raise IndeterminateProduct("0*inf product")
        return ProjPoint(na, nb)

    def inv(self) -> "ProjPoint":
        return ProjPoint(self.b, self.a)

    def one_minus(self) -> "ProjPoint":
        """1 - [a:b] = [b-a : b]; 1 - inf = inf."""
        return ProjPoint(self.b - self.a, self.b)

    def serialize(self) -> str:
        if self.is_infinity():
            return "inf"
        return "[%s:%s]" % (self.a.serialize(), self.b.serialize())

    @staticmethod
    def parse(s: str) -> "ProjPoint":
        s = s.strip()
        if s == "inf":
            return PP_INF
        if not (s.startswith("[") and s.endswith("]")) or ":" not in s:
            raise ParseError("bad ProjPoint literal: %r" % (s,))
        left, right = s[1:-1].split(":", 1)
        return ProjPoint(GaussRat.parse(left), GaussRat.parse(right))

    def __repr__(self):
        return "ProjPoint(%r)" % (self.serialize(),)


PP_INF = ProjPoint(ONE, ZERO)
PP_ZERO = ProjPoint(ZERO)
PP_ONE = ProjPoint(ONE)


def pp(x) -> ProjPoint:
    """Finite point shortcut."""
    return ProjPoint(_coerce(x))


def _det(z: ProjPoint, w: ProjPoint) -> GaussRat:
    return z.a * w.b - w.a * z.b


def cross_ratio(z1: ProjPoint, z2: ProjPoint, z3: ProjPoint, z4: ProjPoint) -> ProjPoint:
    """CR(z1,z2,z3,z4) = ((z1-z3)/(z1-z4)) : ((z2-z3)/(z2-z4)).

    Computed homogeneously.  Any single coincidence pattern among the
    degenerate 2|2 splits {z1=z3,z2=z4} -> 0, {z1=z4,z2=z3} -> inf and
    {z1=z2,z3=z4} -> 1 comes out of the same formula; three or more
    coincident points give [0:0] and raise UnstableConfiguration.
    """
    num = _det(z1, z3) * _det(z2, z4)
    den = _det(z1, z4) * _det(z2, z3)
    if num.is_zero() and den.is_zero():
        raise UnstableConfiguration("three or more coincident points")
    return ProjPoint(num, den)


def mobius(z: ProjPoint, al, be, ga, de) -> ProjPoint:
    """[a:b] -> [al*a+be*b : ga*a+de*b]; requires al*de - be*ga != 0."""
    al, be, ga, de = map(_coerce, (al, be, ga, de))
    if (al * de - be * ga).is_zero():
        raise ExactFieldError("singular Mobius transformation")
    return ProjPoint(al * z.a + be * z.b, ga * z.a + de * z.b)
