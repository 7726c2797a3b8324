"""Exhaustive enumeration of polynomials by degree, with per-degree statistics.

Every polynomial in the range is traced and re-checked. The integer range of
each degree is cut into contiguous blocks; workers process blocks and the
partial reports are merged in block order, so the result does not depend on
the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterator

from . import collatz
from .gf2poly import Poly, _bar, _reverse

__all__ = [
    'CLASSES', 'ScanReport', 'DegreeStats', 'BarCheckReport', 'count_class',
    'enumerate_class', 'scan', 'bar_sample_check', 'SAFETY_MAX_DEGREE',
]

CLASSES = ('all', 'odd', 'even', 'P00', 'P01', 'P10', 'P11')
SCAN_CLASSES = ('all', 'odd', 'even')
SAFETY_MAX_DEGREE = 22
MAX_WITNESSES = 8
_BLOCK = 1 << 12


def count_class(d: int, cls: str) -> int:
    """Closed-form size of a class of degree-d polynomials.

    ``P{i}{j}`` is the set of S with S(i) = j.
    """
    if cls not in CLASSES:
        raise ValueError(f'unknown class {cls!r}')
    if cls == 'all':
        if d < 0:
            raise ValueError('degree must be >= 0')
        return 1 << d
    if cls in ('odd', 'even'):
        if d < 2:
            raise ValueError(f'closed form for the {cls} class needs d >= 2')
        odd = 1 << (d - 2)
        return odd if cls == 'odd' else (1 << d) - odd
    if d < 1:
        raise ValueError(f'closed form for {cls} needs d >= 1')
    return 1 << (d - 1)


def _member(v: int, cls: str) -> bool:
    if cls == 'all':
        return True
    at0 = v & 1
    at1 = v.bit_count() & 1
    if cls == 'odd':
        return bool(at0 and at1)
    if cls == 'even':
        return not (at0 and at1)
    point, value = int(cls[1]), int(cls[2])
    return (at0 if point == 0 else at1) == value


def _ints(d: int, cls: str, lo: int | None = None, hi: int | None = None) -> Iterator[int]:
    start = 1 << d if lo is None else lo
    stop = 1 << (d + 1) if hi is None else hi
    if cls == 'all':
        yield from range(start, stop)
        return
    if cls == 'odd' or cls == 'P01':
        start |= 1
        for v in range(start, stop, 2):
            if _member(v, cls):
                yield v
        return
    for v in range(start, stop):
        if _member(v, cls):
            yield v


def enumerate_class(d: int, cls: str = 'all') -> Iterator[Poly]:
    """Degree-d polynomials of a class, ascending by coefficient integer."""
    if cls not in CLASSES:
        raise ValueError(f'unknown class {cls!r}')
    if d < 0:
        raise ValueError('degree must be >= 0')
    if d == 0:
        if cls in ('all', 'odd', 'P01', 'P11'):
            yield Poly(1)
        return
    for v in _ints(d, cls):
        yield Poly(v)


# ---------- reports

def _ratio_dict(r: Fraction | None) -> dict[str, int] | None:
    return None if r is None else {'num': r.numerator, 'den': r.denominator}


@dataclass
class DegreeStats:
    degree: int
    count: int = 0
    expected_count: int | None = None
    max_length: int = 0
    witnesses: list[int] = field(default_factory=list)
    witness_count: int = 0
    histogram: dict[int, int] = field(default_factory=dict)

    def add(self, v: int, length: int) -> None:
        self.count += 1
        self.histogram[length] = self.histogram.get(length, 0) + 1
        if length > self.max_length:
            self.max_length = length
            self.witnesses = [v]
            self.witness_count = 1
        elif length == self.max_length:
            self.witness_count += 1
            if len(self.witnesses) < MAX_WITNESSES:
                self.witnesses.append(v)

    def merge(self, other: DegreeStats) -> None:
        # other covers a later block, so its witnesses are larger integers
        self.count += other.count
        for k, c in other.histogram.items():
            self.histogram[k] = self.histogram.get(k, 0) + c
        if other.max_length > self.max_length:
            self.max_length = other.max_length
            self.witnesses = list(other.witnesses)
            self.witness_count = other.witness_count
        elif other.max_length == self.max_length and other.count:
            self.witness_count += other.witness_count
            room = MAX_WITNESSES - len(self.witnesses)
            self.witnesses.extend(other.witnesses[:room])

    def to_dict(self) -> dict[str, Any]:
        return {
            'degree': self.degree,
            'count': self.count,
            'expected_count': self.expected_count,
            'max_length': self.max_length,
            'max_witness': f'0x{self.witnesses[0]:x}' if self.witnesses else None,
            'witnesses': [f'0x{w:x}' for w in self.witnesses],
            'witness_count': self.witness_count,
            'histogram': {str(k): v for k, v in sorted(self.histogram.items())},
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> DegreeStats:
        return cls(
            degree=d['degree'], count=d['count'], expected_count=d['expected_count'],
            max_length=d['max_length'], witnesses=[int(w, 16) for w in d['witnesses']],
            witness_count=d['witness_count'],
            histogram={int(k): v for k, v in d['histogram'].items()},
        )


@dataclass
class ScanReport:
    degree_range: tuple[int, int]
    cls: str
    degrees: dict[int, DegreeStats] = field(default_factory=dict)
    max_ratio: Fraction | None = None
    max_ratio_witness: int | None = None
    violations: list[dict[str, Any]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(s.count for s in self.degrees.values())

    @property
    def class_counts(self) -> dict[int, int]:
        return {d: s.count for d, s in sorted(self.degrees.items())}

    @property
    def length_histogram(self) -> dict[int, int]:
        h: dict[int, int] = {}
        for s in self.degrees.values():
            for k, c in s.histogram.items():
                h[k] = h.get(k, 0) + c
        return dict(sorted(h.items()))

    @property
    def max_length(self) -> int:
        return max((s.max_length for s in self.degrees.values()), default=0)

    @property
    def max_length_witnesses(self) -> list[Poly]:
        top = self.max_length
        return [Poly(w) for d, s in sorted(self.degrees.items()) if s.max_length == top and s.count
                for w in s.witnesses]

    @property
    def ok(self) -> bool:
        return not self.violations

    def _fold_ratio(self, ratio: Fraction | None, witness: int | None) -> None:
        if ratio is not None and (self.max_ratio is None or ratio > self.max_ratio):
            self.max_ratio = ratio
            self.max_ratio_witness = witness

    def merge(self, part: ScanReport) -> None:
        for d, s in part.degrees.items():
            if d in self.degrees:
                self.degrees[d].merge(s)
            else:
                self.degrees[d] = s
        self._fold_ratio(part.max_ratio, part.max_ratio_witness)
        self.violations.extend(part.violations)

    def to_dict(self) -> dict[str, Any]:
        return {
            'degree_range': list(self.degree_range),
            'class': self.cls,
            'total': self.total,
            'class_counts': {str(d): c for d, c in self.class_counts.items()},
            'length_histogram': {str(k): v for k, v in self.length_histogram.items()},
            'max_length': self.max_length,
            'max_length_witnesses': [f'0x{p.bits:x}' for p in self.max_length_witnesses],
            'max_ratio': _ratio_dict(self.max_ratio),
            'max_ratio_witness': None if self.max_ratio_witness is None else f'0x{self.max_ratio_witness:x}',
            'per_degree': [s.to_dict() for _, s in sorted(self.degrees.items())],
            'violations': list(self.violations),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ScanReport:
        ratio = d['max_ratio']
        return cls(
            degree_range=tuple(d['degree_range']),
            cls=d['class'],
            degrees={s['degree']: DegreeStats.from_dict(s) for s in d['per_degree']},
            max_ratio=None if ratio is None else Fraction(ratio['num'], ratio['den']),
            max_ratio_witness=None if d['max_ratio_witness'] is None else int(d['max_ratio_witness'], 16),
            violations=list(d['violations']),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        """Per-degree table, a blank line, then the length histogram."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator='\n')
        w.writerow(['degree', 'count', 'expected_count', 'max_length', 'max_witness', 'witness_count'])
        for _, s in sorted(self.degrees.items()):
            row = s.to_dict()
            w.writerow([row['degree'], row['count'], row['expected_count'], row['max_length'],
                        row['max_witness'] or '', row['witness_count']])
        w.writerow([])
        w.writerow(['length', 'count'])
        for k, c in self.length_histogram.items():
            w.writerow([k, c])
        return buf.getvalue()


# ---------- scanning

def _scan_block(job: tuple[int, int, int, str, int]) -> ScanReport:
    d, lo, hi, cls, max_steps = job
    part = ScanReport((d, d), cls)
    stats = DegreeStats(d)
    part.degrees[d] = stats
    for v in _ints(d, cls, lo, hi):
        a = Poly(v)
        try:
            t = collatz.trace(a, max_steps, store_degree=None)
        except collatz.StepBudgetExceeded as exc:
            part.violations.append({'poly': f'0x{v:x}', 'rule': 'step-budget', 'index': None, 'detail': str(exc)})
            continue
        except collatz.TheoremViolation as exc:
            part.violations.append({'poly': f'0x{v:x}', 'rule': 'theorem', 'index': None, 'detail': str(exc)})
            continue
        for bad in collatz.check_trace(t):
            part.violations.append({'poly': f'0x{v:x}', **bad.to_dict()})
        stats.add(v, t.length)
        if d > 0:
            part._fold_ratio(Fraction(t.length, d), v)
    return part


def _jobs(d_min: int, d_max: int, cls: str, max_steps: int) -> list[tuple[int, int, int, str, int]]:
    jobs = []
    for d in range(d_min, d_max + 1):
        lo, hi = 1 << d, 1 << (d + 1)
        for start in range(lo, hi, _BLOCK):
            jobs.append((d, start, min(hi, start + _BLOCK), cls, max_steps))
    return jobs


def scan(d_min: int, d_max: int, cls: str = 'all', workers: int = 1, *,
         max_steps: int = collatz.DEFAULT_MAX_STEPS, max_degree: int = SAFETY_MAX_DEGREE) -> ScanReport:
    """Trace and re-check every polynomial with d_min <= degree <= d_max."""
    if cls not in SCAN_CLASSES:
        raise ValueError(f'scan class must be one of {SCAN_CLASSES}, not {cls!r}')
    if not 1 <= d_min <= d_max:
        raise ValueError(f'need 1 <= d_min <= d_max, got {d_min}..{d_max}')
    if d_max > max_degree:
        raise ValueError(f'd_max {d_max} exceeds the safety limit {max_degree}')
    if workers < 1:
        raise ValueError('workers must be positive')
    jobs = _jobs(d_min, d_max, cls, max_steps)
    report = ScanReport((d_min, d_max), cls)
    if workers == 1 or len(jobs) == 1:
        parts = map(_scan_block, jobs)
        for part in parts:
            report.merge(part)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_scan_block, jobs):
                report.merge(part)
    for d, s in report.degrees.items():
        s.expected_count = count_class(d, cls) if d >= 2 or cls == 'all' else s.count
        if s.count != s.expected_count:
            report.violations.append({'poly': None, 'rule': 'class-count', 'index': d,
                                      'detail': f'degree {d}: {s.count} polynomials, expected {s.expected_count}'})
    return report


# ---------- bar equivariance

@dataclass
class BarCheckReport:
    seed: int
    d_max: int
    samples: list[str] = field(default_factory=list)
    passed: int = 0
    failures: list[str] = field(default_factory=list)
    reciprocal: list[dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict[str, Any]:
        return {'seed': self.seed, 'd_max': self.d_max, 'sample_size': len(self.samples),
                'passed': self.passed, 'failures': self.failures, 'reciprocal': self.reciprocal}


def _bar_equivariant(a: Poly, max_steps: int) -> bool:
    t = collatz.trace(a, max_steps, store_degree=None)
    tb = collatz.trace(Poly(_bar(a.bits)), max_steps, store_degree=None)
    return (t.length == tb.length
            and all(_bar(p.bits) == q.bits for p, q in zip(t.odd_terms, tb.odd_terms)))


def bar_sample_check(d_max: int, sample_size: int, seed: int, *, include: tuple[Poly, ...] = (),
                     max_steps: int = collatz.DEFAULT_MAX_STEPS) -> BarCheckReport:
    """Check that tracing bar(A) gives bar of each odd term of A, on a seeded sample.

    Polynomials in ``include`` are checked first and also compared with their
    reciprocal (the reciprocal is not expected to preserve lengths).
    """
    if sample_size < 1:
        raise ValueError('sample_size must be >= 1')
    rng = random.Random(seed)
    report = BarCheckReport(seed, d_max)
    polys = list(include)
    while len(polys) < sample_size:
        polys.append(Poly(rng.randrange(1, 1 << (d_max + 1))))
    for a in polys:
        report.samples.append(f'0x{a.bits:x}')
        if _bar_equivariant(a, max_steps):
            report.passed += 1
        else:
            report.failures.append(f'0x{a.bits:x}')
    for a in include:
        star = Poly(_reverse(a.bits))
        report.reciprocal.append({
            'poly': f'0x{a.bits:x}', 'length': collatz.length(a, max_steps),
            'reciprocal': f'0x{star.bits:x}', 'reciprocal_length': collatz.length(star, max_steps),
        })
    return report
