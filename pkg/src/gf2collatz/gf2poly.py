"""Arithmetic on polynomials over GF(2).

A polynomial b_n x^n + ... + b_1 x + b_0 is stored as the nonnegative
integer b_n 2^n + ... + b_1 2 + b_0, so coefficient i lives in bit i.
Python integers are arrays of machine words, which makes addition,
shifts and valuations at x word-parallel operations.

The module-level helpers prefixed with an underscore work directly on
integers and are what the Collatz engine uses in its inner loop. The
:class:`Poly` wrapper is immutable and hashable.
"""

from __future__ import annotations

import re
from functools import lru_cache
from typing import Iterable, Sequence

__all__ = [
    'Poly', 'PolyError', 'ParseError', 'ZeroPolynomialError', 'ONE', 'X', 'X1', 'M',
    'parse', 'render', 'add', 'mul', 'mul_naive', 'divrem', 'pow', 'eval01',
    'is_odd', 'val_x', 'val_x1', 'val_x1_by_division', 'bar', 'bar_by_horner',
    'reciprocal', 'degree', 'FORMATS',
]

FORMATS = ('symbolic', 'binary', 'hex')


class PolyError(ValueError):
    """Domain error for a polynomial operation (zero input, 0^0, ...)."""


class ZeroPolynomialError(PolyError):
    """Raised where a nonzero polynomial is required."""


class ParseError(PolyError):
    """Malformed polynomial text; ``position`` is the 0-based offset."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f'{message} at position {position} in {text!r}')
        self.text = text
        self.position = position


# ---------- integer-level kernels

def _degree(a: int) -> int:
    return a.bit_length() - 1


def _val_x(a: int) -> int:
    return (a & -a).bit_length() - 1


def _mul_schoolbook(a: int, b: int) -> int:
    if a.bit_length() < b.bit_length():
        a, b = b, a
    c = 0
    while b:
        if b & 1:
            c ^= a
        a <<= 1
        b >>= 1
    return c


_WINDOW = 4


def _mul_windowed(a: int, b: int) -> int:
    # comb method: 4-bit digits of b against a table of a*w, w < 16
    if a.bit_length() < b.bit_length():
        a, b = b, a
    table = [0] * (1 << _WINDOW)
    for w in range(1, 1 << _WINDOW):
        table[w] = table[w >> 1] << 1 if not w & 1 else table[w ^ 1] ^ a
    c = 0
    shift = 0
    mask = (1 << _WINDOW) - 1
    while b:
        d = b & mask
        if d:
            c ^= table[d] << shift
        b >>= _WINDOW
        shift += _WINDOW
    return c


def _mul(a: int, b: int) -> int:
    if min(a.bit_length(), b.bit_length()) <= 16:
        return _mul_schoolbook(a, b)
    return _mul_windowed(a, b)


def _mul_m(a: int) -> int:
    """Multiply by M = x^2 + x + 1."""
    return a ^ (a << 1) ^ (a << 2)


def _spread_table() -> tuple[int, ...]:
    out = []
    for byte in range(256):
        v = 0
        for i in range(8):
            if byte >> i & 1:
                v |= 1 << (2 * i)
        out.append(v)
    return tuple(out)


_SPREAD = _spread_table()


def _square(a: int) -> int:
    """Frobenius: coefficient i moves to 2i."""
    if a < 256:
        return _SPREAD[a]
    raw = a.to_bytes((a.bit_length() + 7) // 8, 'little')
    out = bytearray(2 * len(raw))
    for i, byte in enumerate(raw):
        s = _SPREAD[byte]
        out[2 * i] = s & 0xFF
        out[2 * i + 1] = s >> 8
    return int.from_bytes(out, 'little')


def _pow(a: int, n: int) -> int:
    if n < 0:
        raise PolyError('negative exponent')
    if n == 0:
        if a == 0:
            raise PolyError('0^0 is undefined')
        return 1
    result = 1
    base = a
    while True:
        if n & 1:
            result = _mul(result, base)
        n >>= 1
        if not n:
            return result
        base = _square(base)


def _divmod(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise ZeroDivisionError('division by zero polynomial')
    m = _degree(a)
    n = _degree(b)
    if m < n:
        return 0, a
    q = 0
    for shift in range(m - n, -1, -1):
        if a >> (shift + n) & 1:
            a ^= b << shift
            q |= 1 << shift
    return q, a


@lru_cache(maxsize=None)
def _bar_masks(levels: int) -> tuple[int, ...]:
    # mask k selects the positions i < 2^levels whose index has bit k set
    width = 1 << levels
    masks = []
    for k in range(levels):
        half = 1 << k
        unit = ((1 << half) - 1) << half
        period = half << 1
        repunit = ((1 << width) - 1) // ((1 << period) - 1)
        masks.append(unit * repunit)
    return tuple(masks)


def _bar(a: int) -> int:
    # Lucas: C(i, j) is odd iff j is a bitwise subset of i, so p(x+1) is the
    # superset-sum transform of the coefficient vector.
    if a < 2:
        return a
    levels = (a.bit_length() - 1).bit_length()
    for k, mask in enumerate(_bar_masks(levels)):
        a ^= (a & mask) >> (1 << k)
    return a


def _val_x1(a: int) -> int:
    return _val_x(_bar(a))


def _strip(a: int) -> tuple[int, int, int]:
    """Return (val_x, val_x1, odd part) of a nonzero integer polynomial."""
    va = _val_x(a)
    a >>= va
    t = _bar(a)
    vb = _val_x(t)
    if vb:
        a = _bar(t >> vb)
    return va, vb, a


def _reverse(a: int) -> int:
    return int(format(a, 'b')[::-1], 2)


# ---------- the Poly value type

class Poly:
    """Immutable polynomial over GF(2), coefficient i in bit i of ``bits``."""

    __slots__ = ('_bits',)

    def __init__(self, bits: int = 0):
        if isinstance(bits, Poly):
            bits = bits._bits
        if not isinstance(bits, int) or isinstance(bits, bool) or bits < 0:
            raise TypeError(f'coefficient integer must be a nonnegative int, not {bits!r}')
        object.__setattr__(self, '_bits', bits)

    def __setattr__(self, name, value):
        raise AttributeError('Poly is immutable')

    @classmethod
    def from_exponents(cls, exponents: Iterable[int]) -> Poly:
        v = 0
        for e in exponents:
            v ^= 1 << e
        return cls(v)

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[int]) -> Poly:
        """Little-endian coefficient list, ``coeffs[i]`` is the coefficient of x^i."""
        return cls(sum(1 << i for i, c in enumerate(coeffs) if c & 1))

    @property
    def bits(self) -> int:
        return self._bits

    @property
    def degree(self) -> int:
        if not self._bits:
            raise ZeroPolynomialError('degree of the zero polynomial is undefined')
        return self._bits.bit_length() - 1

    def coeffs(self) -> list[int]:
        return [self._bits >> i & 1 for i in range(self._bits.bit_length())]

    def exponents(self) -> list[int]:
        """Exponents with nonzero coefficient, decreasing."""
        v = self._bits
        return [i for i in range(v.bit_length() - 1, -1, -1) if v >> i & 1]

    def __getitem__(self, i: int) -> int:
        return self._bits >> i & 1

    def __int__(self):
        return self._bits

    def __index__(self):
        return self._bits

    def __bool__(self):
        return self._bits != 0

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self._bits == other._bits
        if isinstance(other, int) and not isinstance(other, bool):
            return self._bits == other
        return NotImplemented

    def __hash__(self):
        return hash(('Poly', self._bits))

    def __add__(self, other):
        if isinstance(other, Poly):
            return Poly(self._bits ^ other._bits)
        if isinstance(other, int) and other in (0, 1):
            return Poly(self._bits ^ other)
        return NotImplemented

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __mul__(self, other):
        if isinstance(other, Poly):
            return Poly(_mul(self._bits, other._bits))
        if isinstance(other, int) and other in (0, 1):
            return Poly(self._bits * other)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        return Poly(_pow(self._bits, n))

    def __divmod__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        q, r = _divmod(self._bits, other._bits)
        return Poly(q), Poly(r)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __lshift__(self, n: int):
        return Poly(self._bits << n)

    def __repr__(self):
        return f"Poly('{render(self)}')"

    def __str__(self):
        return render(self)


ONE = Poly(1)
X = Poly(0b10)
X1 = Poly(0b11)
M = Poly(0b111)


def _nonzero(p: Poly, what: str) -> int:
    if not p._bits:
        raise ZeroPolynomialError(f'{what} of the zero polynomial is undefined')
    return p._bits


# ---------- public operations

def add(p: Poly, q: Poly) -> Poly:
    return Poly(p.bits ^ q.bits)


def mul(p: Poly, q: Poly) -> Poly:
    """Carry-less product."""
    return Poly(_mul(p.bits, q.bits))


def mul_naive(p: Poly, q: Poly) -> Poly:
    """Quadratic coefficient-by-coefficient product, kept as a test oracle."""
    a, b = p.coeffs(), q.coeffs()
    if not a or not b:
        return Poly(0)
    c = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            c[i + j] ^= ai & bj
    return Poly.from_coeffs(c)


def divrem(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    """Quotient and remainder, ``p == q*quotient + remainder``."""
    quo, rem = _divmod(p.bits, q.bits)
    return Poly(quo), Poly(rem)


def pow(p: Poly, n: int) -> Poly:  # noqa: A001 - mirrors the operation name
    return Poly(_pow(p.bits, n))


def degree(p: Poly) -> int:
    return p.degree


def eval01(p: Poly, point: int) -> int:
    """Value of p at 0 or 1."""
    if point == 0:
        return p.bits & 1
    if point == 1:
        return p.bits.bit_count() & 1
    raise PolyError(f'evaluation point must be 0 or 1, not {point!r}')


def is_odd(p: Poly) -> bool:
    """True when p has no linear factor, i.e. gcd(p, x(x+1)) = 1."""
    v = _nonzero(p, 'parity')
    return bool(v & 1) and bool(v.bit_count() & 1)


def val_x(p: Poly) -> int:
    return _val_x(_nonzero(p, 'valuation at x'))


def val_x1(p: Poly) -> int:
    return _val_x1(_nonzero(p, 'valuation at x+1'))


def val_x1_by_division(p: Poly) -> int:
    """Valuation at x+1 by repeated long division (cross-check oracle)."""
    v = _nonzero(p, 'valuation at x+1')
    e = 0
    while True:
        q, r = _divmod(v, 0b11)
        if r:
            return e
        v = q
        e += 1


def bar(p: Poly) -> Poly:
    """Substitute x+1 for x."""
    return Poly(_bar(p.bits))


def bar_by_horner(p: Poly) -> Poly:
    """Horner evaluation of p at x+1; slow reference for :func:`bar`."""
    acc = 0
    v = p.bits
    for i in range(v.bit_length() - 1, -1, -1):
        acc = (acc << 1) ^ acc ^ (v >> i & 1)
    return Poly(acc)


def reciprocal(p: Poly) -> Poly:
    """x^deg(p) * p(1/x): coefficients reversed over [0, deg p]."""
    return Poly(_reverse(_nonzero(p, 'reciprocal')))


# ---------- text formats

_TERM = re.compile(r'\s*(?:(x)(?:\s*\^\s*(\d+))?|(\d+))\s*')


def parse(text: str, *, nonzero: bool = False) -> Poly:
    """Parse symbolic (``x^8+x^3+1``), ``0b`` binary (MSB first) or ``0x`` hex text.

    With ``nonzero=True`` the zero polynomial is rejected.
    """
    if not isinstance(text, str):
        raise TypeError('polynomial text must be a string')
    stripped = text.strip()
    if not stripped:
        raise ParseError('empty input', text, 0)
    offset = text.index(stripped[0])
    lowered = stripped.lower()
    if lowered.startswith(('0b', '0x')):
        digits = stripped[2:]
        base = 2 if lowered[1] == 'b' else 16
        allowed = '01' if base == 2 else '0123456789abcdefABCDEF'
        if not digits:
            raise ParseError('missing digits', text, offset + 2)
        for i, ch in enumerate(digits):
            if ch not in allowed and ch != '_':
                raise ParseError(f'invalid digit {ch!r}', text, offset + 2 + i)
        if digits.startswith('_') or digits.endswith('_') or '__' in digits:
            raise ParseError('misplaced underscore', text, offset + 2)
        value = int(digits, base)
    else:
        value = _parse_symbolic(text)
    if nonzero and not value:
        raise ParseError('zero polynomial not allowed here', text, offset)
    return Poly(value)


def _parse_symbolic(text: str) -> int:
    value = 0
    seen: set[int] = set()
    pos = 0
    n = len(text)
    while True:
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError('expected a term', text, pos)
        start = m.start(1) if m.group(1) else m.start(3)
        if m.group(1):
            exp = int(m.group(2)) if m.group(2) is not None else 1
        else:
            const = int(m.group(3))
            if const not in (0, 1):
                raise ParseError(f'coefficient {const} is not in GF(2)', text, start)
            if const == 0:
                if pos != 0 or m.end() != n:
                    raise ParseError("'0' must stand alone", text, start)
                return 0
            exp = 0
        if exp in seen:
            raise ParseError(f'duplicate term of degree {exp}', text, start)
        seen.add(exp)
        value |= 1 << exp
        pos = m.end()
        if pos == n:
            return value
        if text[pos] != '+':
            raise ParseError(f'unexpected character {text[pos]!r}', text, pos)
        pos += 1
        if pos == n:
            raise ParseError('dangling +', text, pos - 1)


def render(p: Poly, format: str = 'symbolic') -> str:  # noqa: A002
    v = p.bits
    if format == 'hex':
        return f'0x{v:x}'
    if format == 'binary':
        return f'0b{v:b}'
    if format != 'symbolic':
        raise ValueError(f'unknown format {format!r}; expected one of {FORMATS}')
    if not v:
        return '0'
    terms = []
    for i in p.exponents():
        terms.append('1' if i == 0 else 'x' if i == 1 else f'x^{i}')
    return '+'.join(terms)
