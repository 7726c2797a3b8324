"""Polynomial families with closed-form Collatz lengths.

Each family is built from M = x^2+x+1 and a few integer parameters. The
module predicts the length from the known formulas, runs the engine, and
compares. Families whose formula is only conjectured are tagged as such;
a mismatch there is a finding, not a bug.

Parameter names per family (the ones marked * also accept a raw ``n``)::

    GEOM_POW2             r          M^(2^r) + ... + M + 1
    GEOM_POW2_POW         r, u       (M^(2^r) + ... + 1)^(2^u)
    GEOM_DEFICIT_POW      r, v, u    (M^(2^r - 2v) + ... + 1)^(2^u)
    GEOM_EVEN_POW         v, u       (M^(2v) + ... + 1)^(2^u)
    GEOM_GENERAL*         r, j       M^(2^r - j) + ... + 1
    MN_PLUS1*             r, j       M^(2^r - j) + 1
    MN*                   r, j       M^(2^r - j)
    ONE_PLUS_M_POW_PLUS1* r, j       (1 + M)^(2^r - j) + 1
    MIXED_PRODUCT         a, b       1 + M^a (M + 1)^b
    M2M1_POW              n          (M^2 + M + 1)^n
    TRINOMIAL             n          x^n + x + 1
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable, Mapping, NamedTuple

from . import collatz
from .gf2poly import Poly, _mul, _mul_m, _pow, _square

log = logging.getLogger(__name__)

__all__ = [
    'Family', 'Status', 'DomainError', 'FamilySpec', 'Prediction', 'PredictionRecord',
    'PlateauReport', 'Sweep', 'normalize', 'build', 'two_adic', 'cover_exponent',
    'predicted_length', 'expected_odd_term', 'odd_term_range', 'check', 'check_plateau',
    'sweep', 'trinomial_s', 'geometric_sum',
]


class Family(str, Enum):
    GEOM_POW2 = 'GEOM_POW2'
    GEOM_POW2_POW = 'GEOM_POW2_POW'
    GEOM_DEFICIT_POW = 'GEOM_DEFICIT_POW'
    GEOM_EVEN_POW = 'GEOM_EVEN_POW'
    GEOM_GENERAL = 'GEOM_GENERAL'
    MN_PLUS1 = 'MN_PLUS1'
    MN = 'MN'
    ONE_PLUS_M_POW_PLUS1 = 'ONE_PLUS_M_POW_PLUS1'
    MIXED_PRODUCT = 'MIXED_PRODUCT'
    M2M1_POW = 'M2M1_POW'
    TRINOMIAL = 'TRINOMIAL'

    def __str__(self):
        return self.value


class Status(str, Enum):
    PROVEN = 'proven'
    CONJECTURED = 'conjectured'

    def __str__(self):
        return self.value


class DomainError(ValueError):
    """Parameters outside a family's domain."""


PARAMS: dict[Family, tuple[str, ...]] = {
    Family.GEOM_POW2: ('r',),
    Family.GEOM_POW2_POW: ('r', 'u'),
    Family.GEOM_DEFICIT_POW: ('r', 'v', 'u'),
    Family.GEOM_EVEN_POW: ('v', 'u'),
    Family.GEOM_GENERAL: ('r', 'j'),
    Family.MN_PLUS1: ('r', 'j'),
    Family.MN: ('r', 'j'),
    Family.ONE_PLUS_M_POW_PLUS1: ('r', 'j'),
    Family.MIXED_PRODUCT: ('a', 'b'),
    Family.M2M1_POW: ('n',),
    Family.TRINOMIAL: ('n',),
}
_RAW_N = {Family.GEOM_GENERAL, Family.MN_PLUS1, Family.MN, Family.ONE_PLUS_M_POW_PLUS1}


@dataclass(frozen=True)
class FamilySpec:
    family: Family
    params: tuple[tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(self, 'family', Family(self.family))
        items = self.params.items() if isinstance(self.params, Mapping) else self.params
        object.__setattr__(self, 'params', tuple((str(k), int(v)) for k, v in items))

    @classmethod
    def of(cls, family: Family | str, **params: int) -> FamilySpec:
        return cls(Family(family), tuple(params.items()))

    def __getitem__(self, name: str) -> int:
        for k, v in self.params:
            if k == name:
                return v
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(k == name for k, _ in self.params)

    def as_dict(self) -> dict[str, int]:
        return dict(self.params)

    def __str__(self):
        inner = ', '.join(f'{k}={v}' for k, v in self.params)
        return f'{self.family.value}({inner})'

    def to_dict(self) -> dict[str, Any]:
        return {'family': self.family.value, 'params': self.as_dict()}


class Prediction(NamedTuple):
    value: int
    status: Status
    rule: str


# ---------- integer helpers

def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def two_adic(n: int) -> tuple[int, int]:
    """Write n = 2^t * s with s odd."""
    if n < 1:
        raise DomainError(f'two_adic needs n >= 1, got {n}')
    t = (n & -n).bit_length() - 1
    return t, n >> t


def cover_exponent(n: int, strict: bool = False) -> int:
    """Inclusive: the r with 2^(r-1) < n <= 2^r (n >= 2). Strict: least r with n < 2^r."""
    if strict:
        if n < 1:
            raise DomainError(f'strict cover exponent needs n >= 1, got {n}')
        return n.bit_length()
    if n < 2:
        raise DomainError(f'cover exponent needs n >= 2, got {n}')
    return (n - 1).bit_length()


def trinomial_s(n: int) -> int:
    """Greatest s with n - 2^(s+1) >= 1."""
    if n < 3:
        raise DomainError(f'x^n+x+1 needs n >= 3, got {n}')
    return (n - 1).bit_length() - 2


def _geom(top: int) -> int:
    g = 0
    for _ in range(top + 1):
        g = _mul_m(g) ^ 1
    return g


def geometric_sum(top: int) -> Poly:
    """M^top + ... + M + 1."""
    if top < 0:
        raise DomainError('geometric sum needs a nonnegative top exponent')
    return Poly(_geom(top))


def _frob(a: int, u: int) -> int:
    for _ in range(u):
        a = _square(a)
    return a


_M = 0b111
_M1 = 0b110  # 1 + M = x^2 + x


# ---------- normalization

def _need(cond: bool, spec: FamilySpec, constraint: str) -> None:
    if not cond:
        raise DomainError(f'{spec}: requires {constraint}')


def _params(spec: FamilySpec) -> dict[str, int]:
    got = spec.as_dict()
    names = PARAMS[spec.family]
    if spec.family in _RAW_N and set(got) == {'n'}:
        return got
    if set(got) != set(names):
        allowed = ' or '.join([', '.join(names)] + (['n'] if spec.family in _RAW_N else []))
        raise DomainError(f'{spec}: expected parameters {allowed}')
    return got


def _rj(spec: FamilySpec, p: dict[str, int]) -> int:
    if 'n' in p:
        return p['n']
    _need(p['r'] >= 1, spec, 'r >= 1')
    _need(p['j'] >= 0, spec, 'j >= 0')
    return (1 << p['r']) - p['j']


def _canon_rj(family: Family, n: int) -> FamilySpec:
    r = cover_exponent(n)
    return FamilySpec.of(family, r=r, j=(1 << r) - n)


def normalize(spec: FamilySpec) -> FamilySpec:
    """Canonical parameters for ``spec``, possibly in a covering family.

    Raises DomainError naming the violated constraint.
    """
    f = spec.family
    p = _params(spec)
    if f is Family.GEOM_POW2:
        _need(p['r'] >= 1, spec, 'r >= 1')
    elif f is Family.GEOM_POW2_POW:
        _need(p['r'] >= 1 and p['u'] >= 1, spec, 'r >= 1 and u >= 1')
    elif f is Family.GEOM_DEFICIT_POW:
        r, v, u = p['r'], p['v'], p['u']
        _need(r >= 2, spec, 'r >= 2')
        _need(v >= 1 and u >= 1, spec, 'u, v >= 1')
        top = (1 << r) - 2 * v
        _need(top > 0, spec, '2v < 2^r')
        if v == 1:
            return FamilySpec.of(f, r=r, v=v, u=u)
        if _is_pow2(top):
            return FamilySpec.of(Family.GEOM_POW2_POW, r=top.bit_length() - 1, u=u)
        if top <= 1 << (r - 1):
            # the length formula only holds with r the least exponent covering 2^r - 2v
            r2 = cover_exponent(top)
            return normalize(FamilySpec.of(f, r=r2, v=((1 << r2) - top) // 2, u=u))
    elif f is Family.GEOM_EVEN_POW:
        _need(p['v'] >= 1 and p['u'] >= 1, spec, 'u, v >= 1')
    elif f is Family.GEOM_GENERAL:
        n = _rj(spec, p)
        _need(n >= 1, spec, '2^r - j >= 1')
        if n == 1:
            return FamilySpec.of(f, r=1, j=1)
        if _is_pow2(n):
            return FamilySpec.of(Family.GEOM_POW2, r=n.bit_length() - 1)
        return _canon_rj(f, n)
    elif f in (Family.MN_PLUS1, Family.MN):
        n = _rj(spec, p)
        _need(n >= 2, spec, 'n = 2^r - j >= 2')
        return _canon_rj(f, n)
    elif f is Family.ONE_PLUS_M_POW_PLUS1:
        n = _rj(spec, p)
        _need(n >= 2, spec, 'n = 2^r - j >= 2')
        if _is_pow2(n):
            # (1+M)^(2^r) + 1 = M^(2^r)
            return _canon_rj(Family.MN, n)
        return _canon_rj(f, n)
    elif f is Family.MIXED_PRODUCT:
        _need(p['a'] >= 2 and p['b'] >= 2, spec, 'a, b >= 2')
    elif f is Family.M2M1_POW:
        _need(p['n'] >= 1, spec, 'n >= 1')
        if p['n'] == 1:
            return FamilySpec.of(Family.GEOM_POW2, r=1)
    elif f is Family.TRINOMIAL:
        _need(p['n'] >= 3, spec, 'n >= 3')
    return FamilySpec.of(f, **p)


# ---------- construction

def _build(spec: FamilySpec) -> int:
    f = spec.family
    p = spec.as_dict()
    if f is Family.GEOM_POW2:
        return _geom(1 << p['r'])
    if f is Family.GEOM_POW2_POW:
        return _frob(_geom(1 << p['r']), p['u'])
    if f is Family.GEOM_DEFICIT_POW:
        return _frob(_geom((1 << p['r']) - 2 * p['v']), p['u'])
    if f is Family.GEOM_EVEN_POW:
        return _frob(_geom(2 * p['v']), p['u'])
    if f is Family.TRINOMIAL:
        return (1 << p['n']) | 0b11
    if f is Family.MIXED_PRODUCT:
        return _mul(_pow(_M, p['a']), _pow(_M1, p['b'])) ^ 1
    if f is Family.M2M1_POW:
        return _pow(_geom(2), p['n'])
    n = p['n'] if 'n' in p else (1 << p['r']) - p['j']
    if f is Family.GEOM_GENERAL:
        return _geom(n)
    if f is Family.MN_PLUS1:
        return _pow(_M, n) ^ 1
    if f is Family.MN:
        return _pow(_M, n)
    if f is Family.ONE_PLUS_M_POW_PLUS1:
        return _pow(_M1, n) ^ 1
    raise DomainError(f'unknown family {f!r}')


def build(spec: FamilySpec) -> Poly:
    """The family polynomial, after checking the parameters."""
    normalize(spec)
    return Poly(_build(spec))


# ---------- predictions

def predicted_length(spec: FamilySpec) -> Prediction:
    c = normalize(spec)
    f = c.family
    p = c.as_dict()
    proven = Status.PROVEN
    if f is Family.GEOM_POW2:
        return Prediction(1 << p['r'], proven, '2^r')
    if f is Family.GEOM_POW2_POW:
        return Prediction((1 << p['u']) * ((1 << p['r']) - 1) + 1, proven, '2^u (2^r - 1) + 1')
    if f is Family.GEOM_DEFICIT_POW:
        return Prediction((1 << p['u']) * (2 * p['v'] - 1) + 1, proven, '2^u (2v - 1) + 1')
    if f is Family.GEOM_EVEN_POW:
        r = cover_exponent(2 * p['v'], strict=True)
        return Prediction((1 << p['u']) * ((1 << r) - 2 * p['v'] - 1) + 1, proven,
                          '2^u (2^r - 2v - 1) + 1, r least with 2v < 2^r')
    if f is Family.GEOM_GENERAL:
        j = p['j']
        if j == 1:
            return Prediction(1, proven, 'j = 1: odd part is 1')
        return Prediction(j, proven, 'j' if j % 2 else 'j = 2k: 2k')
    if f is Family.MN_PLUS1:
        return Prediction(p['j'] + 1, proven, 'j + 1')
    if f is Family.MN:
        if p['j'] == 0:
            return Prediction((1 << p['r']) + 1, proven, 'j = 0: 2^r + 1')
        return Prediction(p['j'] + 1, proven, 'j + 1')
    if f is Family.ONE_PLUS_M_POW_PLUS1:
        return Prediction((1 << p['r']) + 1, proven, '2^r + 1')
    if f is Family.MIXED_PRODUCT:
        return _mixed(p['a'], p['b'])
    if f is Family.M2M1_POW:
        n = p['n']
        return Prediction(n + 1, proven if _is_pow2(n) else Status.CONJECTURED, 'n + 1')
    if f is Family.TRINOMIAL:
        return Prediction((1 << trinomial_s(p['n'])) + 1, Status.CONJECTURED,
                          '2^s + 1, s greatest with n - 2^(s+1) >= 1')
    raise DomainError(f'no formula for {c}')


def _mixed(a: int, b: int) -> Prediction:
    total = a + b
    proven = Status.PROVEN
    if _is_pow2(total):
        return Prediction(b + 1, proven, 'a+b = 2^r: b + 1')
    if total % 2 == 0:
        r, u = two_adic(total)
        w = cover_exponent(u - 1, strict=True)
        return Prediction(b + (1 << r) * ((1 << w) - u) + 1, proven,
                          'a+b = 2^r u, u >= 3 odd: b + 2^r (2^w - u) + 1')
    v = (total - 1) // 2
    if _is_pow2(v):
        return Prediction(a + 2 * b - 1, proven, 'a+b = 2^t + 1: a + 2b - 1')
    r = cover_exponent(2 * v, strict=True)
    return Prediction(b + (1 << r) - 2 * v, proven, 'a+b = 2v + 1: b + 2^r - 2v')


# ---------- closed-form odd terms

def odd_term_range(spec: FamilySpec) -> range | None:
    """Indices k for which the k-th odd term has a known closed form."""
    c = normalize(spec)
    p = c.as_dict()
    if c.family is Family.GEOM_POW2:
        return range((1 << p['r']) - 1)
    if c.family is Family.GEOM_POW2_POW:
        return range((1 << p['u']) * ((1 << p['r']) - 1))
    if c.family is Family.GEOM_DEFICIT_POW and p['v'] == 1:
        return range(1 << p['u'])
    if c.family is Family.ONE_PLUS_M_POW_PLUS1:
        return range((1 << p['r']) - p['j'])
    if c.family is Family.MIXED_PRODUCT:
        return range(p['b'])
    return None


def _mixed_term(m_exp: int, m1_exp: int) -> int:
    return _mul(_pow(_M, m_exp), _pow(_M1, m1_exp)) ^ 1


def expected_odd_term(spec: FamilySpec, k: int) -> Poly | None:
    """Closed form of the k-th odd term (A_{2k+1}), or None when none is known."""
    rng = odd_term_range(spec)
    if rng is None or k not in rng:
        return None
    c = normalize(spec)
    p = c.as_dict()
    f = c.family
    if f is Family.GEOM_POW2:
        r = p['r']
        return Poly(_mixed_term(k + 1, (1 << r) - k - 1))
    if f is Family.GEOM_POW2_POW:
        e = 1 << p['u']
        return Poly(_mixed_term(e + k, e * ((1 << p['r']) - 1) - k))
    if f is Family.GEOM_DEFICIT_POW:
        e = 1 << p['u']
        tail = _frob(_geom((1 << (p['r'] - 1)) - 2), p['u'] + 1)
        return Poly(_mul(_mixed_term(e + k, e - k) ^ 1, tail) ^ 1)
    if f is Family.ONE_PLUS_M_POW_PLUS1:
        return Poly(_mixed_term(k, (1 << p['r']) - p['j'] - k))
    if f is Family.MIXED_PRODUCT:
        return Poly(_mixed_term(p['a'] + k, p['b'] - k))
    return None


# ---------- verification against the engine

@dataclass(frozen=True)
class PredictionRecord:
    spec: FamilySpec
    canonical: FamilySpec
    poly_degree: int
    predicted: int
    computed: int
    status: Status
    rule: str
    odd_terms_checked: int = 0
    odd_term_mismatches: tuple[int, ...] = ()

    @property
    def match(self) -> bool:
        return self.predicted == self.computed

    @property
    def ok(self) -> bool:
        return self.match and not self.odd_term_mismatches

    def to_dict(self) -> dict[str, Any]:
        return {
            'family': self.spec.family.value,
            'params': self.spec.as_dict(),
            'canonical': self.canonical.to_dict(),
            'poly_degree': self.poly_degree,
            'predicted': self.predicted,
            'computed': self.computed,
            'status': self.status.value,
            'rule': self.rule,
            'match': self.match,
            'odd_terms_checked': self.odd_terms_checked,
            'odd_term_mismatches': list(self.odd_term_mismatches),
        }


def check(spec: FamilySpec, max_steps: int = collatz.DEFAULT_MAX_STEPS) -> PredictionRecord:
    """Compare the predicted length with the engine, and closed-form odd terms if any."""
    canonical = normalize(spec)
    poly = Poly(_build(canonical))
    pred = predicted_length(canonical)
    rng = odd_term_range(canonical)
    t = collatz.trace(poly, max_steps, store_degree=None if rng is not None else -1)
    mismatches = []
    if rng is not None:
        for k in rng:
            if k >= t.length or t.odd_terms[k] != expected_odd_term(canonical, k):
                mismatches.append(k)
    return PredictionRecord(
        spec=spec,
        canonical=canonical,
        poly_degree=poly.degree,
        predicted=pred.value,
        computed=t.length,
        status=pred.status,
        rule=pred.rule,
        odd_terms_checked=len(rng) if rng is not None else 0,
        odd_term_mismatches=tuple(mismatches),
    )


@dataclass(frozen=True)
class PlateauReport:
    """Block structure of the odd degree sequence of x^n + x + 1.

    The conjectured shape is blocks of sizes 1, 1, 2, 4, ..., 2^(s-1) of
    constant degree, followed by the final 1.
    """

    n: int
    s: int
    degrees: tuple[int, ...]
    block_sizes: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]
    blocks_constant: tuple[bool, ...]
    runs: tuple[int, ...]
    length_ok: bool

    @property
    def runs_match(self) -> bool:
        """Maximal equal-degree runs coincide exactly with the blocks."""
        return self.runs == self.block_sizes

    @property
    def conforming(self) -> bool:
        return self.length_ok and all(self.blocks_constant)

    def to_dict(self) -> dict[str, Any]:
        return {
            'n': self.n, 's': self.s, 'degrees': list(self.degrees),
            'block_sizes': list(self.block_sizes), 'blocks': [list(b) for b in self.blocks],
            'blocks_constant': list(self.blocks_constant), 'runs': list(self.runs),
            'runs_match': self.runs_match, 'length_ok': self.length_ok,
            'conforming': self.conforming,
        }


def check_plateau(n: int, max_steps: int = collatz.DEFAULT_MAX_STEPS) -> PlateauReport:
    s = trinomial_s(n) if n >= 3 else -1
    if s < 1:
        raise DomainError(f'plateau check needs s >= 1, i.e. n >= 5; got n = {n}')
    degrees = tuple(collatz.degree_sequence(Poly((1 << n) | 0b11), max_steps))
    body = degrees[:-1]
    sizes = (1,) + tuple(1 << t for t in range(s))
    blocks = []
    pos = 0
    for size in sizes:
        blocks.append(body[pos:pos + size])
        pos += size
    constant = tuple(len(b) == size and len(set(b)) == 1 for b, size in zip(blocks, sizes))
    runs = tuple(len(list(g)) for _, g in itertools.groupby(body))
    return PlateauReport(
        n=n, s=s, degrees=degrees, block_sizes=sizes, blocks=tuple(blocks),
        blocks_constant=constant, runs=runs, length_ok=len(degrees) == (1 << s) + 1,
    )


# ---------- sweeps

@dataclass
class Sweep:
    """Ordered records of a parameter sweep plus the points that were skipped."""

    family: Family
    records: list[PredictionRecord] = field(default_factory=list)
    skipped: list[tuple[dict[str, int], str]] = field(default_factory=list)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def lengths(self) -> list[int]:
        return [r.computed for r in self.records]


def _check_point(args: tuple[FamilySpec, int]) -> PredictionRecord:
    return check(*args)


def sweep(family: Family | str, ranges: Mapping[str, Iterable[int]], *,
          where: Callable[[dict[str, int]], bool] | None = None,
          workers: int = 1, max_steps: int = collatz.DEFAULT_MAX_STEPS) -> Sweep:
    """Check every point of the Cartesian product of ``ranges``, in order.

    Points failing ``where`` are dropped silently; out-of-domain points are
    skipped and noted in ``Sweep.skipped``.
    """
    family = Family(family)
    names = list(ranges)
    out = Sweep(family)
    specs = []
    for values in itertools.product(*(list(ranges[k]) for k in names)):
        point = dict(zip(names, values))
        if where is not None and not where(point):
            continue
        spec = FamilySpec.of(family, **point)
        try:
            normalize(spec)
        except DomainError as exc:
            out.skipped.append((point, str(exc)))
            log.info('skipping %s', exc)
            continue
        specs.append(spec)
    jobs = [(s, max_steps) for s in specs]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out.records.extend(pool.map(_check_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        out.records.extend(map(_check_point, jobs))
    return out
