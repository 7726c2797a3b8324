"""Collatz transformations on binary polynomials.

Starting from A, strip every factor x and x+1 to get an odd polynomial,
then repeatedly form 1 + M*P and strip again until the odd term is 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .gf2poly import ONE, Poly, PolyError, ZeroPolynomialError, _degree, _mul_m, _strip

__all__ = [
    'CollatzError', 'StepBudgetExceeded', 'TheoremViolation', 'NotOddError',
    'StripResult', 'TraceRecord', 'Violation', 'DEFAULT_MAX_STEPS', 'DEFAULT_STORE_DEGREE',
    'strip', 'step', 'trace', 'length', 'degree_sequence', 'check_trace', 'length_bound',
]

DEFAULT_MAX_STEPS = 1 << 20
DEFAULT_STORE_DEGREE = 4096


class CollatzError(Exception):
    pass


class StepBudgetExceeded(CollatzError):
    """The iteration ran past ``max_steps`` without reaching 1."""


class TheoremViolation(CollatzError):
    """A proven structural property failed; indicates an engine bug."""


class NotOddError(CollatzError, PolyError):
    pass


@dataclass(frozen=True)
class StripResult:
    a: int
    b: int
    odd_part: Poly

    def __iter__(self):
        return iter((self.a, self.b, self.odd_part))


@dataclass(frozen=True)
class Violation:
    rule: str
    index: int | None
    detail: str

    def to_dict(self) -> dict[str, Any]:
        return {'rule': self.rule, 'index': self.index, 'detail': self.detail}


@dataclass(frozen=True)
class TraceRecord:
    """A full run from ``input`` down to 1.

    ``odd_terms[k]`` is A_{2k+1}, ``even_terms[k]`` is A_{2k+2} and
    ``val_pairs[k]`` its (val_x, val_x1). When the input degree exceeds the
    storage cap, ``odd_terms``/``even_terms`` are None and only degrees and
    valuations are kept.
    """

    input: Poly
    input_val: tuple[int, int]
    odd_terms: tuple[Poly, ...] | None
    even_terms: tuple[Poly, ...] | None
    val_pairs: tuple[tuple[int, int], ...]
    odd_degrees: tuple[int, ...]
    even_degrees: tuple[int, ...]
    length: int

    @property
    def stored(self) -> bool:
        return self.odd_terms is not None

    def to_dict(self, *, terms: bool = True) -> dict[str, Any]:
        d: dict[str, Any] = {
            'input': f'0x{self.input.bits:x}',
            'input_val': list(self.input_val),
            'length': self.length,
            'odd_degrees': list(self.odd_degrees),
            'even_degrees': list(self.even_degrees),
            'val_pairs': [list(p) for p in self.val_pairs],
        }
        if terms and self.stored:
            d['odd_terms'] = [f'0x{p.bits:x}' for p in self.odd_terms]
            d['even_terms'] = [f'0x{p.bits:x}' for p in self.even_terms]
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> TraceRecord:
        def hx(s: str) -> Poly:
            return Poly(int(s, 16))
        odd = tuple(hx(s) for s in d['odd_terms']) if 'odd_terms' in d else None
        even = tuple(hx(s) for s in d['even_terms']) if 'even_terms' in d else None
        return cls(
            input=hx(d['input']),
            input_val=tuple(d['input_val']),
            odd_terms=odd,
            even_terms=even,
            val_pairs=tuple(tuple(p) for p in d['val_pairs']),
            odd_degrees=tuple(d['odd_degrees']),
            even_degrees=tuple(d['even_degrees']),
            length=d['length'],
        )


def length_bound(deg: int) -> int | None:
    """Upper bound 2^(deg-1) on the length; None below degree 2 where it is vacuous."""
    return 1 << (deg - 1) if deg >= 2 else None


def strip(A: Poly) -> StripResult:
    """Split A as x^a (x+1)^b * odd_part."""
    if not A:
        raise ZeroPolynomialError('cannot strip the zero polynomial')
    a, b, odd = _strip(A.bits)
    return StripResult(a, b, Poly(odd))


def step(P: Poly) -> tuple[Poly, int, int, Poly]:
    """One transformation from an odd term: (1 + M*P, a, b, next odd term)."""
    if not P:
        raise ZeroPolynomialError('step of the zero polynomial')
    p = P.bits
    if not (p & 1 and p.bit_count() & 1):
        raise NotOddError(f'step needs an odd polynomial, got {P}')
    even = _mul_m(p) ^ 1
    a, b, nxt = _strip(even)
    _check_step(p, even, a, b, nxt)
    return Poly(even), a, b, Poly(nxt)


def _check_step(p: int, even: int, a: int, b: int, nxt: int) -> None:
    if a < 1 or b < 1:
        raise TheoremViolation(f'even term 0x{even:x} lacks a linear factor (a={a}, b={b})')
    if _degree(even) != _degree(p) + 2:
        raise TheoremViolation(f'even term 0x{even:x} has degree {_degree(even)}, expected {_degree(p) + 2}')
    if _degree(nxt) != _degree(even) - a - b:
        raise TheoremViolation(f'odd term 0x{nxt:x} has the wrong degree')


def trace(A: Poly, max_steps: int = DEFAULT_MAX_STEPS, *,
          store_degree: int | None = DEFAULT_STORE_DEGREE) -> TraceRecord:
    """Run the transformations from A until the odd term is 1.

    Terms are stored when deg(A) <= ``store_degree`` (None stores always).
    """
    if not A:
        raise ZeroPolynomialError('cannot trace the zero polynomial')
    if max_steps < 1:
        raise ValueError('max_steps must be positive')
    src = A.bits
    deg_a = _degree(src)
    keep = store_degree is None or deg_a <= store_degree
    bound = length_bound(deg_a)

    a0, b0, p = _strip(src)
    odd_terms = [p] if keep else None
    even_terms: list[int] | None = [] if keep else None
    val_pairs = []
    odd_degrees = [_degree(p)]
    even_degrees = []
    steps = 0
    while p != 1:
        if steps >= max_steps:
            raise StepBudgetExceeded(f'no termination within {max_steps} steps from {A!r}')
        steps += 1
        even = _mul_m(p) ^ 1
        a, b, nxt = _strip(even)
        _check_step(p, even, a, b, nxt)
        if keep:
            even_terms.append(even)
            odd_terms.append(nxt)
        val_pairs.append((a, b))
        even_degrees.append(_degree(even))
        odd_degrees.append(_degree(nxt))
        p = nxt
        if bound is not None and len(odd_degrees) > bound:
            raise TheoremViolation(f'length of {A!r} exceeds 2^(deg-1) = {bound}')

    return TraceRecord(
        input=A,
        input_val=(a0, b0),
        odd_terms=tuple(map(Poly, odd_terms)) if keep else None,
        even_terms=tuple(map(Poly, even_terms)) if keep else None,
        val_pairs=tuple(val_pairs),
        odd_degrees=tuple(odd_degrees),
        even_degrees=tuple(even_degrees),
        length=len(odd_degrees),
    )


def length(A: Poly, max_steps: int = DEFAULT_MAX_STEPS) -> int:
    """Number of odd terms, the final 1 included."""
    return trace(A, max_steps, store_degree=-1).length


def degree_sequence(A: Poly, max_steps: int = DEFAULT_MAX_STEPS) -> list[int]:
    return list(trace(A, max_steps, store_degree=-1).odd_degrees)


_TERMINAL_EVEN = 0b110  # x^2 + x


def check_trace(t: TraceRecord) -> list[Violation]:
    """Re-verify every structural property of a trace; returns the failures."""
    out: list[Violation] = []

    def bad(rule: str, index: int | None, detail: str) -> None:
        out.append(Violation(rule, index, detail))

    n_odd = len(t.odd_degrees)
    n_even = len(t.even_degrees)
    if t.length != n_odd:
        bad('length-count', None, f'length {t.length} but {n_odd} odd degrees')
    if n_even != n_odd - 1 or len(t.val_pairs) != n_even:
        bad('sequence-sizes', None,
            f'{n_odd} odd terms, {n_even} even terms, {len(t.val_pairs)} valuation pairs')
    if n_odd and t.odd_degrees[-1] != 0:
        bad('terminal', n_odd - 1, f'last odd degree is {t.odd_degrees[-1]}')

    if not t.input:
        bad('input', None, 'zero input')
        return out
    deg_a = t.input.degree
    bound = length_bound(deg_a)
    if bound is not None and t.length > bound:
        bad('length-bound', None, f'length {t.length} > 2^(deg-1) = {bound}')

    for k in range(min(n_even, len(t.val_pairs), n_odd - 1)):
        a, b = t.val_pairs[k]
        if a < 1 or b < 1:
            bad('even-term-linear-factors', k, f'(a, b) = ({a}, {b})')
        if t.even_degrees[k] != t.odd_degrees[k] + 2:
            bad('degree-step', k, f'even degree {t.even_degrees[k]} vs odd degree {t.odd_degrees[k]}')
        if t.odd_degrees[k + 1] != t.even_degrees[k] - a - b:
            bad('degree-drop', k, f'odd degree {t.odd_degrees[k + 1]} != {t.even_degrees[k]} - {a} - {b}')
        if t.odd_degrees[k + 1] > t.odd_degrees[k]:
            bad('odd-degree-monotone', k + 1, f'{t.odd_degrees[k + 1]} > {t.odd_degrees[k]}')
    if n_odd and t.odd_degrees[0] > deg_a:
        bad('odd-degree-monotone', 0, f'first odd degree {t.odd_degrees[0]} > deg(A) = {deg_a}')

    if t.stored:
        _check_terms(t, bad)

    # the cycle after 1: 1 + M = x^2 + x, which strips back to 1
    probe = _mul_m(1) ^ 1
    if probe != _TERMINAL_EVEN or _strip(probe) != (1, 1, 1):
        bad('terminal-cycle', None, f'step from 1 gave 0x{probe:x}')
    return out


def _check_terms(t: TraceRecord, bad) -> None:
    odd, even = t.odd_terms, t.even_terms
    a0, b0, first = _strip(t.input.bits)
    if (a0, b0) != tuple(t.input_val):
        bad('input-strip', None, f'input valuations {t.input_val} != ({a0}, {b0})')
    if not odd or odd[0].bits != first:
        bad('input-strip', 0, 'first odd term is not the odd part of the input')
    if odd and odd[-1] != ONE:
        bad('terminal', len(odd) - 1, f'last odd term is {odd[-1]!r}')
    if len(odd) != len(t.odd_degrees) or len(even) != len(t.even_degrees):
        bad('sequence-sizes', None, 'stored terms disagree with degree lists')
    for k, p in enumerate(odd):
        v = p.bits
        if not v or not (v & 1 and v.bit_count() & 1):
            bad('odd-term', k, f'{p!r} is not odd')
        elif k < len(t.odd_degrees) and _degree(v) != t.odd_degrees[k]:
            bad('degree-record', k, f'odd degree {t.odd_degrees[k]} but term has degree {_degree(v)}')
    for k, e in enumerate(even):
        v = e.bits
        if v & 1 or v.bit_count() & 1:
            bad('even-term-linear-factors', k, f'{e!r} does not vanish at 0 and 1')
        if k < len(odd) and _mul_m(odd[k].bits) ^ 1 != v:
            bad('reconstruction', k, 'even term != 1 + M * odd term')
        if v and k + 1 < len(odd):
            a, b, nxt = _strip(v)
            if k < len(t.val_pairs) and (a, b) != tuple(t.val_pairs[k]):
                bad('valuations', k, f'recorded {t.val_pairs[k]} but even term gives ({a}, {b})')
            if nxt != odd[k + 1].bits:
                bad('reconstruction', k + 1, 'odd term is not the odd part of the previous even term')
    if even:
        last = even[-1].bits
        if not last or _strip(last)[2] != 1:
            bad('final-even-shape', len(even) - 1, 'final even term is not x^a (x+1)^b')
