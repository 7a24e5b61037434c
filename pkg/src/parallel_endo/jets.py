"""Truncated multivariate power series (jets) with exact coefficients.

Monomials are packed into a single int: exponent e_i sits in the base-64
digit i. Since every stored degree is at most K < 64, adding two codes
multiplies the monomials without carries, which keeps products cheap.
"""

from __future__ import annotations

from typing import Dict, Iterable, Sequence, Tuple

from gmpy2 import mpq

from .scalars import Gaussian, decode_scalar, encode_scalar

BASE_BITS = 6
BASE = 1 << BASE_BITS
MASK = BASE - 1
MAX_ORDER = BASE - 1

_DEG: Dict[int, int] = {}


class JetError(ValueError):
    pass


def code_degree(code: int) -> int:
    d = _DEG.get(code)
    if d is None:
        d, c = 0, code
        while c:
            d += c & MASK
            c >>= BASE_BITS
        _DEG[code] = d
    return d


def encode_exponents(exps: Sequence[int]) -> int:
    code = 0
    for i, e in enumerate(exps):
        if e < 0 or e > MAX_ORDER:
            raise JetError(f"exponent {e} out of range")
        code |= e << (BASE_BITS * i)
    return code


def decode_exponents(code: int, n: int) -> Tuple[int, ...]:
    return tuple((code >> (BASE_BITS * i)) & MASK for i in range(n))


def _mul_terms(a: dict, b: dict, order: int) -> dict:
    out: dict = {}
    if not a or not b:
        return out
    deg = code_degree
    # bucket b by degree so that the inner loop stops early
    bd = {}
    for cb, vb in b.items():
        bd.setdefault(deg(cb), []).append((cb, vb))
    bdegs = sorted(bd)
    get = out.get
    for ca, va in a.items():
        room = order - deg(ca)
        if room < 0:
            continue
        for db in bdegs:
            if db > room:
                break
            for cb, vb in bd[db]:
                c = ca + cb
                v = get(c)
                out[c] = va * vb if v is None else v + va * vb
    return {c: v for c, v in out.items() if v}


class Jet:
    """Sparse truncated power series in n variables up to total degree K.

    Jets compare and combine only with jets of the same (n, K); use
    ``truncate`` to align orders explicitly.
    """

    __slots__ = ("n", "K", "terms")

    def __init__(self, n: int, K: int, terms: dict | None = None, _clean: bool = False):
        if K < 0 or K > MAX_ORDER:
            raise JetError(f"truncation order {K} out of range")
        self.n = n
        self.K = K
        if terms is None:
            terms = {}
        elif not _clean:
            terms = {c: v for c, v in terms.items() if v and code_degree(c) <= K}
        self.terms = terms

    # construction ---------------------------------------------------------
    @classmethod
    def zero(cls, n, K):
        return cls(n, K, {}, True)

    @classmethod
    def constant(cls, n, K, value):
        if not isinstance(value, Gaussian):
            value = mpq(value)
        return cls(n, K, {0: value} if value else {}, True)

    @classmethod
    def one(cls, n, K):
        return cls.constant(n, K, 1)

    @classmethod
    def variable(cls, n, K, i, coeff=1):
        if not 0 <= i < n:
            raise JetError(f"variable index {i} out of range for n={n}")
        if K < 1:
            return cls.zero(n, K)
        return cls(n, K, {1 << (BASE_BITS * i): mpq(coeff) if not isinstance(coeff, Gaussian) else coeff})

    @classmethod
    def from_dict(cls, n, K, mapping: dict):
        """mapping: exponent tuple -> scalar."""
        terms = {}
        for exps, v in mapping.items():
            if len(exps) != n:
                raise JetError(f"exponent {exps} has wrong length for n={n}")
            if not isinstance(v, Gaussian):
                v = mpq(v)
            c = encode_exponents(exps)
            terms[c] = terms.get(c, 0) + v
        return cls(n, K, terms)

    # checks ---------------------------------------------------------------
    def _check(self, other: "Jet"):
        if self.n != other.n or self.K != other.K:
            raise JetError(
                f"incompatible jets: (n={self.n}, K={self.K}) vs (n={other.n}, K={other.K})")

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Jet):
            return self + Jet.constant(self.n, self.K, other)
        self._check(other)
        out = dict(self.terms)
        for c, v in other.terms.items():
            w = out.get(c)
            out[c] = v if w is None else w + v
        return Jet(self.n, self.K, {c: v for c, v in out.items() if v}, True)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.n, self.K, {c: -v for c, v in self.terms.items()}, True)

    def __sub__(self, other):
        if not isinstance(other, Jet):
            return self + (-other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            if not other:
                return Jet.zero(self.n, self.K)
            return Jet(self.n, self.K, {c: v * other for c, v in self.terms.items()}, True)
        self._check(other)
        return Jet(self.n, self.K, _mul_terms(self.terms, other.terms, self.K), True)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.invert()
        return Jet(self.n, self.K, {c: v / other for c, v in self.terms.items()}, True)

    def __pow__(self, m: int):
        if m < 0:
            return self.invert() ** (-m)
        out = Jet.one(self.n, self.K)
        base = self
        while m:
            if m & 1:
                out = out * base
            m >>= 1
            if m:
                base = base * base
        return out

    def mul_truncated(self, other: "Jet", order: int) -> "Jet":
        """Product kept only up to degree ``order`` (<= both truncations)."""
        if self.n != other.n:
            raise JetError("incompatible variable counts")
        if order > min(self.K, other.K):
            raise JetError(f"cannot multiply to order {order} with jets of order {self.K}, {other.K}")
        return Jet(self.n, order, _mul_terms(self.terms, other.terms, order), True)

    def invert(self) -> "Jet":
        """Inverse by the finite Neumann series of the nilpotent part."""
        c0 = self.terms.get(0)
        if not c0:
            raise JetError("non-unit jet")
        inv0 = 1 / c0
        # a = c0 (1 + m) with m nilpotent of order > K
        m = Jet(self.n, self.K, {c: v * inv0 for c, v in self.terms.items() if c != 0}, True)
        out = Jet.one(self.n, self.K)
        power = Jet.one(self.n, self.K)
        for k in range(1, self.K + 1):
            power = power * m
            if not power.terms:
                break
            out = out + (power if k % 2 == 0 else -power)
        return out * inv0

    # calculus -------------------------------------------------------------
    def partial(self, i: int) -> "Jet":
        """Formal derivative in variable i; the result has order K-1."""
        if not 0 <= i < self.n:
            raise JetError(f"variable index {i} out of range for n={self.n}")
        if self.K == 0:
            raise JetError("cannot differentiate a jet of order 0")
        shift = BASE_BITS * i
        unit = 1 << shift
        out = {}
        for c, v in self.terms.items():
            e = (c >> shift) & MASK
            if e:
                out[c - unit] = v * e
        return Jet(self.n, self.K - 1, out, True)

    def truncate(self, K: int) -> "Jet":
        if K > self.K:
            raise JetError(f"cannot raise truncation from {self.K} to {K}")
        if K == self.K:
            return self
        return Jet(self.n, K, {c: v for c, v in self.terms.items() if code_degree(c) <= K}, True)

    def extend(self, K: int) -> "Jet":
        """Reinterpret a polynomial as a jet of higher order.

        Only legitimate when the jet is known to be an exact polynomial
        (e.g. a generated metric coefficient), which the caller asserts.
        """
        if K < self.K:
            return self.truncate(K)
        return Jet(self.n, K, dict(self.terms), True)

    # inspection -----------------------------------------------------------
    def constant_term(self):
        return self.terms.get(0, mpq(0))

    value_at_origin = constant_term

    def coefficient(self, exps: Sequence[int]):
        return self.terms.get(encode_exponents(exps), mpq(0))

    def homogeneous(self, deg: int) -> "Jet":
        return Jet(self.n, self.K, {c: v for c, v in self.terms.items() if code_degree(c) == deg}, True)

    def degree(self) -> int:
        return max((code_degree(c) for c in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def is_complex(self) -> bool:
        return any(isinstance(v, Gaussian) for v in self.terms.values())

    def items(self) -> Iterable[Tuple[Tuple[int, ...], object]]:
        for c in sorted(self.terms, key=lambda c: (code_degree(c), decode_exponents(c, self.n)[::-1])):
            yield decode_exponents(c, self.n), self.terms[c]

    def map_coefficients(self, f) -> "Jet":
        return Jet(self.n, self.K, {c: f(v) for c, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return set(self.terms) <= {0} and self.constant_term() == other
        return self.n == other.n and self.K == other.K and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, self.K, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            body = "0"
        else:
            parts = []
            for exps, v in self.items():
                mono = "*".join(f"x{i}^{e}" if e > 1 else f"x{i}" for i, e in enumerate(exps) if e)
                parts.append(f"{v}" + (f"*{mono}" if mono else ""))
            body = " + ".join(parts)
        return f"Jet(n={self.n}, K={self.K}: {body})"

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "n": self.n,
            "K": self.K,
            "terms": [[list(exps), encode_scalar(v)] for exps, v in self.items()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Jet":
        try:
            n, K, terms = obj["n"], obj["K"], obj["terms"]
        except (KeyError, TypeError) as exc:
            raise JetError(f"malformed jet: missing {exc}") from None
        if not isinstance(n, int) or not isinstance(K, int) or n < 0:
            raise JetError("malformed jet: n and K must be nonnegative ints")
        mapping = {}
        for t in terms:
            exps, val = t
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise JetError(f"malformed jet: exponent {list(exps)} has length != {n}")
            if sum(exps) > K:
                raise JetError(f"malformed jet: monomial {list(exps)} exceeds order {K}")
            if exps in mapping:
                raise JetError(f"malformed jet: duplicate monomial {list(exps)}")
            mapping[exps] = decode_scalar(val)
        return cls.from_dict(n, K, mapping)


def poly_jet(n: int, K: int, mapping: dict) -> Jet:
    """Convenience alias used by generators: exponent tuple -> coefficient."""
    return Jet.from_dict(n, K, mapping)
