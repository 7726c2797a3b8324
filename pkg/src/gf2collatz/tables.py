"""Regenerate the published degree-sequence tables and diff them cell by cell.

Expected cells live in ``data/tables.json``, guarded by ``tables.json.sha256``
so a transcription change is never mistaken for a computation change.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Any

from . import collatz
from .families import FamilySpec, build
from .gf2poly import parse, render

TABLE_IDS = ('mn_plus1', 'mn', 'one_plus_m', 'mixed', 'm2m1', 'trinomial', 'remark')


class FixtureError(RuntimeError):
    pass


def _read(name: str) -> bytes:
    return resources.files(__package__).joinpath('data').joinpath(name).read_bytes()


@lru_cache(maxsize=1)
def load_fixtures() -> dict[str, Any]:
    raw = _read('tables.json')
    want = _read('tables.json.sha256').decode().split()[0]
    got = hashlib.sha256(raw).hexdigest()
    if got != want:
        raise FixtureError(f'tables.json checksum {got} does not match recorded {want}')
    return json.loads(raw)


@dataclass
class RowResult:
    params: dict[str, Any]
    poly: str
    expected_degrees: list[int]
    expected_length: int
    degrees: list[int]
    length: int

    @property
    def diffs(self) -> list[str]:
        out = []
        if self.length != self.expected_length:
            out.append(f'length: expected {self.expected_length}, got {self.length}')
        if self.degrees != self.expected_degrees:
            n = max(len(self.degrees), len(self.expected_degrees))
            for i in range(n):
                e = self.expected_degrees[i] if i < len(self.expected_degrees) else None
                g = self.degrees[i] if i < len(self.degrees) else None
                if e != g:
                    out.append(f'degree[{i}]: expected {e}, got {g}')
        return out

    @property
    def key(self) -> str:
        return ', '.join(f'{k}={v}' for k, v in self.params.items())

    def to_dict(self) -> dict[str, Any]:
        return {
            'params': self.params, 'poly': self.poly, 'degrees': self.degrees, 'length': self.length,
            'expected_degrees': self.expected_degrees, 'expected_length': self.expected_length,
            'match': not self.diffs, 'diffs': self.diffs,
        }


@dataclass
class TableResult:
    table_id: str
    origin: str
    rows: list[RowResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(not r.diffs for r in self.rows)

    def to_dict(self) -> dict[str, Any]:
        return {'table': self.table_id, 'origin': self.origin, 'match': self.ok,
                'rows': [r.to_dict() for r in self.rows]}


def reproduce(table_id: str, max_steps: int = collatz.DEFAULT_MAX_STEPS) -> TableResult:
    tables = load_fixtures()
    if table_id not in tables:
        raise KeyError(f'unknown table {table_id!r}; expected one of {", ".join(TABLE_IDS)}')
    table = tables[table_id]
    result = TableResult(table_id, table['origin'])
    for row in table['rows']:
        params = row['params']
        if table['family'] is None:
            poly = parse(params['poly'], nonzero=True)
        else:
            poly = build(FamilySpec.of(table['family'], **params))
        degrees = collatz.degree_sequence(poly, max_steps)
        result.rows.append(RowResult(
            params=dict(params), poly=render(poly, 'hex'),
            expected_degrees=list(row['degrees']), expected_length=row['length'],
            degrees=degrees, length=len(degrees),
        ))
    return result
