"""Command-line entry point.

Exit codes: 0 success, 1 mathematical mismatch or violation, 2 usage or I/O
error, 3 a conjectured formula disagreed with the engine (a finding).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from typing import Any, Callable, Sequence

from . import collatz, families, scanner, tables
from .families import DomainError, Family, Status
from .gf2poly import ParseError, Poly, PolyError, parse, render

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_FINDING = 3

FORMATS = ('text', 'csv', 'json')


class UsageError(Exception):
    pass


# ---------- argument helpers

_RANGE = re.compile(r'^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$')


def parse_values(text: str) -> list[int]:
    """'9' -> [9]; '9..16' -> [9, ..., 16]; '1,3,5..7' -> [1, 3, 5, 6, 7]."""
    out: list[int] = []
    for part in text.split(','):
        m = _RANGE.match(part)
        try:
            if m:
                lo, hi = int(m.group(1)), int(m.group(2))
                if lo > hi:
                    raise UsageError(f'empty range {part.strip()!r}')
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise UsageError(f'bad parameter value {part.strip()!r}') from None
    return out


def parse_assignments(items: Sequence[str]) -> dict[str, list[int]]:
    ranges: dict[str, list[int]] = {}
    for item in items:
        name, sep, value = item.partition('=')
        name = name.strip()
        if not sep or not re.fullmatch(r'[a-z]\w*', name):
            raise UsageError(f'expected NAME=VALUES, got {item!r}')
        if name in ranges:
            raise UsageError(f'parameter {name!r} given twice')
        ranges[name] = parse_values(value)
    return ranges


_CONSTRAINT = re.compile(r'^(.+?)(<=|>=|==|!=|<|>)(.+)$')
_OPS: dict[str, Callable[[int, int], bool]] = {
    '<=': lambda a, b: a <= b, '>=': lambda a, b: a >= b, '==': lambda a, b: a == b,
    '!=': lambda a, b: a != b, '<': lambda a, b: a < b, '>': lambda a, b: a > b,
}


def _linear(expr: str) -> list[tuple[int, str]]:
    terms = []
    for sign, tok in re.findall(r'([+-]?)\s*([a-z]\w*|\d+)', expr.replace(' ', '')):
        terms.append((-1 if sign == '-' else 1, tok))
    rebuilt = ''.join(('-' if s < 0 else '+') + t for s, t in terms).lstrip('+')
    if not terms or rebuilt != expr.replace(' ', '').lstrip('+'):
        raise UsageError(f'bad expression {expr!r}')
    return terms


def parse_where(constraints: Sequence[str]) -> Callable[[dict[str, int]], bool] | None:
    """Constraints like 'a+b<=10' or 'a<=b' over sweep parameters."""
    checks = []
    for text in constraints:
        for piece in text.split(','):
            m = _CONSTRAINT.match(piece.strip())
            if not m:
                raise UsageError(f'bad constraint {piece!r}')
            checks.append((_linear(m.group(1)), _OPS[m.group(2)], _linear(m.group(3))))
    if not checks:
        return None

    def value(terms, point):
        total = 0
        for sign, tok in terms:
            if tok.isdigit():
                total += sign * int(tok)
            elif tok in point:
                total += sign * point[tok]
            else:
                raise UsageError(f'constraint mentions unknown parameter {tok!r}')
        return total

    def where(point: dict[str, int]) -> bool:
        return all(op(value(lhs, point), value(rhs, point)) for lhs, op, rhs in checks)
    return where


def _poly_arg(text: str) -> Poly:
    return parse(text, nonzero=True)


def _input_block(p: Poly) -> dict[str, str]:
    return {'symbolic': render(p), 'hex': render(p, 'hex')}


# ---------- rendering

class Emitter:
    def __init__(self, args: argparse.Namespace, argv: Sequence[str]):
        self.format = args.format
        self.out = args.out
        self.argv = list(argv)

    def emit(self, command: str, payload: Any, text: str, csv_rows: list[list[Any]] | None = None,
             poly: Poly | None = None, csv_text: str | None = None) -> None:
        if self.format == 'json':
            envelope = {
                'command': command,
                'argv': self.argv,
                'input': _input_block(poly) if poly is not None else None,
                'format': 'json',
                'payload': payload,
            }
            body = json.dumps(envelope, indent=2) + '\n'
        elif self.format == 'csv' and csv_text is not None:
            body = csv_text
        elif self.format == 'csv':
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator='\n')
            writer.writerows(csv_rows or [])
            body = buf.getvalue()
        else:
            body = text if text.endswith('\n') else text + '\n'
        if self.out in (None, '-'):
            sys.stdout.write(body)
        else:
            with open(self.out, 'w', encoding='utf-8', newline='') as fh:
                fh.write(body)


# ---------- commands

def cmd_trace(args, em: Emitter) -> int:
    poly = _poly_arg(args.poly)
    t = collatz.trace(poly, args.max_steps)
    violations = collatz.check_trace(t)
    payload = t.to_dict(terms=args.show_even)
    payload['violations'] = [v.to_dict() for v in violations]
    lines = [f'input: {render(poly)} ({render(poly, "hex")})',
             f'odd degree sequence: {list(t.odd_degrees)}',
             f'Length {t.length}']
    if args.show_even and t.stored:
        lines.append('k | even term | a | b | next odd term')
        for k, (e, (a, b)) in enumerate(zip(t.even_terms, t.val_pairs)):
            lines.append(f'{k} | {render(e)} | {a} | {b} | {render(t.odd_terms[k + 1])}')
    for v in violations:
        lines.append(f'VIOLATION {v.rule} at {v.index}: {v.detail}')
    rows: list[list[Any]] = [['k', 'odd_degree', 'odd_term', 'even_degree', 'even_term', 'a', 'b']]
    for k, d in enumerate(t.odd_degrees):
        odd = render(t.odd_terms[k], 'hex') if t.stored else ''
        if k < len(t.val_pairs):
            even = render(t.even_terms[k], 'hex') if t.stored and args.show_even else ''
            rows.append([k, d, odd, t.even_degrees[k], even, *t.val_pairs[k]])
        else:
            rows.append([k, d, odd, '', '', '', ''])
    em.emit('trace', payload, '\n'.join(lines), rows, poly)
    return EXIT_MISMATCH if violations else EXIT_OK


def cmd_length(args, em: Emitter) -> int:
    poly = _poly_arg(args.poly)
    n = collatz.length(poly, args.max_steps)
    em.emit('length', {'length': n}, f'Length {n}', [['input', 'length'], [render(poly, 'hex'), n]], poly)
    return EXIT_OK


def _family_exit(records: Sequence[families.PredictionRecord]) -> int:
    if any(r.status is Status.PROVEN and not r.ok for r in records):
        return EXIT_MISMATCH
    if any(r.status is Status.CONJECTURED and not r.ok for r in records):
        return EXIT_FINDING
    return EXIT_OK


def cmd_family(args, em: Emitter) -> int:
    try:
        family = Family(args.family.upper())
    except ValueError:
        raise UsageError(f'unknown family {args.family!r}; expected one of '
                         + ', '.join(f.value for f in Family)) from None
    ranges = parse_assignments(args.params)
    if not ranges:
        raise UsageError('no parameters given')
    where = parse_where(args.where or [])
    result = families.sweep(family, ranges, where=where, workers=args.workers, max_steps=args.max_steps)
    if not result.records:
        notes = '; '.join(msg for _, msg in result.skipped) or 'no points selected'
        raise UsageError(f'no in-domain points: {notes}')
    code = _family_exit(result.records)
    lines = []
    for r in result.records:
        flag = 'ok' if r.ok else ('FINDING' if r.status is Status.CONJECTURED else 'MISMATCH')
        extra = f'  odd-term mismatches at k={list(r.odd_term_mismatches)}' if r.odd_term_mismatches else ''
        via = '' if r.canonical == r.spec else f'  [as {r.canonical}]'
        lines.append(f'{r.spec}  deg {r.poly_degree}  predicted {r.predicted}  computed {r.computed}'
                     f'  {r.status}  {flag}{via}{extra}')
    for point, msg in result.skipped:
        lines.append(f'skipped {point}: {msg}')
    header = ['family', 'params', 'poly_degree', 'predicted', 'computed', 'status', 'match',
              'odd_terms_checked', 'odd_term_mismatches']
    rows: list[list[Any]] = [header]
    for r in result.records:
        d = r.to_dict()
        rows.append([d['family'], ';'.join(f'{k}={v}' for k, v in d['params'].items()), d['poly_degree'],
                     d['predicted'], d['computed'], d['status'], str(d['match']).lower(),
                     d['odd_terms_checked'], ';'.join(map(str, d['odd_term_mismatches']))])
    payload = {
        'family': family.value,
        'records': [r.to_dict() for r in result.records],
        'skipped': [{'params': p, 'reason': m} for p, m in result.skipped],
        'exit_code': code,
    }
    em.emit('family', payload, '\n'.join(lines), rows)
    return code


def cmd_table(args, em: Emitter) -> int:
    ids = tables.TABLE_IDS if args.table == 'all' else (args.table,)
    if args.table != 'all' and args.table not in tables.TABLE_IDS:
        raise UsageError(f'unknown table {args.table!r}; expected one of {", ".join(tables.TABLE_IDS)} or all')
    results = [tables.reproduce(t, args.max_steps) for t in ids]
    lines = []
    rows: list[list[Any]] = [['table', 'params', 'degrees', 'length', 'match']]
    for res in results:
        lines.append(f'== {res.table_id}: {res.origin}')
        for row in res.rows:
            mark = 'ok' if not row.diffs else 'MISMATCH'
            lines.append(f'{row.key} | {row.degrees} | {row.length} | {mark}')
            for diff in row.diffs:
                lines.append(f'    {diff}')
            rows.append([res.table_id, ';'.join(f'{k}={v}' for k, v in row.params.items()),
                         ' '.join(map(str, row.degrees)), row.length, str(not row.diffs).lower()])
    ok = all(r.ok for r in results)
    lines.append('all cells match' if ok else 'MISMATCH')
    payload = {'tables': [r.to_dict() for r in results], 'match': ok}
    em.emit('table', payload, '\n'.join(lines), rows)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_scan(args, em: Emitter) -> int:
    if not 1 <= args.d_min <= args.d_max:
        raise UsageError(f'need 1 <= d_min <= d_max, got {args.d_min}..{args.d_max}')
    try:
        report = scanner.scan(args.d_min, args.d_max, args.cls, args.workers, max_steps=args.max_steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ratio = report.max_ratio
    lines = [
        f'degrees {args.d_min}..{args.d_max}, class {args.cls}: {report.total} polynomials',
        'degree | count | expected | max length | witness',
    ]
    for d, s in sorted(report.degrees.items()):
        w = f'0x{s.witnesses[0]:x}' if s.witnesses else '-'
        lines.append(f'{d} | {s.count} | {s.expected_count} | {s.max_length} | {w}')
    lines.append(f'length histogram: {report.length_histogram}')
    if ratio is not None:
        lines.append(f'max length/degree: {ratio.numerator}/{ratio.denominator} '
                     f'at 0x{report.max_ratio_witness:x}')
    lines.append(f'violations: {len(report.violations)}')
    for v in report.violations[:20]:
        lines.append(f'  {v}')
    em.emit('scan', report.to_dict(), '\n'.join(lines), csv_text=report.to_csv())
    return EXIT_OK if report.ok else EXIT_MISMATCH


def cmd_count(args, em: Emitter) -> int:
    try:
        closed = scanner.count_class(args.degree, args.cls)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.degree > scanner.SAFETY_MAX_DEGREE:
        raise UsageError(f'degree {args.degree} exceeds the enumeration limit {scanner.SAFETY_MAX_DEGREE}')
    enumerated = sum(1 for _ in scanner.enumerate_class(args.degree, args.cls))
    ok = closed == enumerated
    payload = {'degree': args.degree, 'class': args.cls, 'closed_form': closed,
               'enumerated': enumerated, 'match': ok}
    text = f'degree {args.degree}, class {args.cls}: closed form {closed}, enumerated {enumerated}'
    rows = [list(payload), [args.degree, args.cls, closed, enumerated, str(ok).lower()]]
    em.emit('count', payload, text, rows)
    return EXIT_OK if ok else EXIT_MISMATCH


# ---------- parser

def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    def default(v):
        return argparse.SUPPRESS if suppress else v
    p.add_argument('--format', choices=FORMATS, default=default('text'))
    p.add_argument('--max-steps', type=int, default=default(collatz.DEFAULT_MAX_STEPS), metavar='N')
    p.add_argument('--workers', type=int, default=default(1), metavar='N')
    p.add_argument('--out', default=default('-'), metavar='PATH', help="output file, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='gf2collatz',
        description='Collatz transformations on binary polynomials: A -> 1 + (x^2+x+1) A.',
    )
    _add_globals(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, suppress=True)
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('trace', parents=[common], help='odd degree sequence and length of one polynomial')
    p.add_argument('poly', help="e.g. 'x^8+x^3+1', 0b100001001 or 0x109")
    p.add_argument('--show-even', action='store_true', help='also print even terms and valuations')
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser('length', parents=[common], help='length of one polynomial')
    p.add_argument('poly')
    p.set_defaults(func=cmd_length)

    p = sub.add_parser('family', parents=[common], help='predicted vs computed lengths over a family')
    p.add_argument('family', help=', '.join(f.value for f in Family))
    p.add_argument('params', nargs='*', help='NAME=VALUES, e.g. n=9..16 or a=2,3')
    p.add_argument('--where', action='append', metavar='CONSTRAINT', help="e.g. 'a+b<=10' or 'a<=b'")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser('table', parents=[common], help='regenerate a published table and diff it')
    p.add_argument('table', help=', '.join(tables.TABLE_IDS) + ' or all')
    p.set_defaults(func=cmd_table)

    p = sub.add_parser('scan', parents=[common], help='exhaustive scan of a degree range')
    p.add_argument('d_min', type=int)
    p.add_argument('d_max', type=int)
    p.add_argument('--class', dest='cls', choices=scanner.SCAN_CLASSES, default='all')
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser('count', parents=[common], help='class sizes, closed form vs enumeration')
    p.add_argument('degree', type=int)
    p.add_argument('--class', dest='cls', choices=scanner.CLASSES, default='all')
    p.set_defaults(func=cmd_count)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.max_steps < 1 or args.workers < 1:
        print('gf2collatz: --max-steps and --workers must be positive', file=sys.stderr)
        return EXIT_USAGE
    em = Emitter(args, argv)
    try:
        return args.func(args, em)
    except (ParseError, UsageError, DomainError, PolyError) as exc:
        print(f'gf2collatz: error: {exc}', file=sys.stderr)
        return EXIT_USAGE
    except collatz.CollatzError as exc:
        print(f'gf2collatz: engine error: {exc}', file=sys.stderr)
        return EXIT_MISMATCH
    except OSError as exc:
        print(f'gf2collatz: I/O error: {exc}', file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
