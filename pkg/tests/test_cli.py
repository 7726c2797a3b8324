import csv
import io
import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from gf2collatz import cli, families
from gf2collatz.cli import EXIT_FINDING, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, main, parse_values, parse_where

SCHEMA = json.loads(resources.files('gf2collatz').joinpath('data').joinpath('output.schema.json').read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, '--format', 'json', *argv)
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert_no_floats(doc)
    return code, doc


def assert_no_floats(node):
    assert not isinstance(node, float), node
    if isinstance(node, dict):
        for v in node.values():
            assert_no_floats(v)
    elif isinstance(node, list):
        for v in node:
            assert_no_floats(v)


# ---------- argument helpers

@pytest.mark.parametrize('text, values', [
    ('9', [9]), ('9..12', [9, 10, 11, 12]), ('1,3,5..7', [1, 3, 5, 6, 7]), (' 2 .. 3 ', [2, 3]),
])
def test_parse_values(text, values):
    assert parse_values(text) == values


@pytest.mark.parametrize('text', ['5..3', 'x', '1,,2', '1..'])
def test_parse_values_rejects(text):
    with pytest.raises(cli.UsageError):
        parse_values(text)


def test_parse_where():
    where = parse_where(['a+b<=10', 'a<=b'])
    assert where({'a': 2, 'b': 8})
    assert not where({'a': 3, 'b': 8})
    assert not where({'a': 5, 'b': 4})
    assert parse_where([]) is None
    with pytest.raises(cli.UsageError):
        parse_where(['a+b'])
    with pytest.raises(cli.UsageError):
        parse_where(['__import__("os")<1'])


# ---------- trace / length

def test_trace_text(capsys):
    code, out, _ = run(capsys, 'trace', 'x^8+x^3+1')
    assert code == EXIT_OK
    assert '[8, 7, 5, 5, 4, 3, 0]' in out and 'Length 7' in out


def test_trace_linear_product(capsys):
    code, out, _ = run(capsys, 'trace', 'x^2+x')
    assert code == EXIT_OK
    assert '[0]' in out and 'Length 1' in out


@pytest.mark.parametrize('text', ['0', '0x0', 'x^2+x^2', 'y'])
def test_trace_rejects_bad_input(capsys, text):
    code, out, err = run(capsys, 'trace', text)
    assert code == EXIT_USAGE
    assert out == '' and 'error' in err


def test_trace_show_even(capsys):
    code, out, _ = run(capsys, 'trace', '0x109', '--show-even')
    assert code == EXIT_OK
    assert 'even term' in out and 'x^10' in out


def test_trace_json(capsys):
    code, doc = run_json(capsys, 'trace', 'x^8+x^5+1', '--show-even')
    assert code == EXIT_OK
    assert doc['input'] == {'symbolic': 'x^8+x^5+1', 'hex': '0x121'}
    assert doc['payload']['odd_degrees'] == [8, 6, 6, 0]
    assert doc['payload']['length'] == 4
    assert len(doc['payload']['even_terms']) == 3


def test_trace_budget_is_engine_error(capsys):
    code, _, err = run(capsys, 'trace', 'x^8+x^3+1', '--max-steps', '2')
    assert code == EXIT_MISMATCH and 'engine error' in err


def test_trace_csv(capsys):
    code, out, _ = run(capsys, '--format', 'csv', 'trace', 'x^7+x+1')
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK
    assert [int(r['odd_degree']) for r in rows] == [7, 5, 0]


def test_length(capsys):
    code, doc = run_json(capsys, 'length', '0b10000000000000001')
    assert code == EXIT_OK and doc['payload'] == {'length': 1}
    code, out, _ = run(capsys, 'length', 'x^7+x+1')
    assert out.strip() == 'Length 3'


# ---------- family

def test_family_mn(capsys):
    code, doc = run_json(capsys, 'family', 'MN', 'n=9..16')
    assert code == EXIT_OK
    assert [r['computed'] for r in doc['payload']['records']] == [8, 7, 6, 5, 4, 3, 2, 17]


def test_family_mixed_with_constraints(capsys):
    code, doc = run_json(capsys, 'family', 'MIXED_PRODUCT', 'a=2..5', 'b=2..5', '--where', 'a+b<=10',
                         '--where', 'a<=b')
    assert code == EXIT_OK
    got = {(r['params']['a'], r['params']['b']): r['computed'] for r in doc['payload']['records']}
    assert len(got) == 10
    assert got[(4, 5)] == 13 and got[(2, 2)] == 3


def test_family_conjectured(capsys):
    code, out, _ = run(capsys, 'family', 'm2m1_pow', 'n=9')
    assert code == EXIT_OK
    assert 'predicted 10  computed 10  conjectured  ok' in out


def test_family_finding_exit_code(capsys, monkeypatch):
    real = families.predicted_length

    def off_by_one(spec):
        pred = real(spec)
        return pred._replace(value=pred.value + 1)

    monkeypatch.setattr(families, 'predicted_length', off_by_one)
    code, out, _ = run(capsys, 'family', 'TRINOMIAL', 'n=17')
    assert code == EXIT_FINDING and 'FINDING' in out
    code, out, _ = run(capsys, 'family', 'MN', 'n=12')
    assert code == EXIT_MISMATCH and 'MISMATCH' in out


@pytest.mark.parametrize('argv', [
    ['family', 'NOPE', 'n=3'],
    ['family', 'MN'],
    ['family', 'MN', 'n=1'],
    ['family', 'MN', 'q=3'],
    ['family', 'MN', 'n=3', '--where', 'z<1'],
])
def test_family_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_family_csv_headers_match_json(capsys):
    code, out, _ = run(capsys, '--format', 'csv', 'family', 'MN_PLUS1', 'n=9..10')
    header = next(csv.reader(io.StringIO(out)))
    record_keys = set(families.check(families.FamilySpec.of('MN_PLUS1', n=9)).to_dict())
    assert set(header) <= record_keys


# ---------- table

def test_table_all(capsys):
    code, doc = run_json(capsys, 'table', 'all')
    assert code == EXIT_OK and doc['payload']['match']
    assert [t['table'] for t in doc['payload']['tables']] == list(cli.tables.TABLE_IDS)


def test_table_rows(capsys):
    _, doc = run_json(capsys, 'table', 'mn_plus1')
    rows = {r['params']['n']: r for r in doc['payload']['tables'][0]['rows']}
    assert sorted(rows) == list(range(9, 17))
    assert rows[15]['degrees'] == [28, 0] and rows[15]['length'] == 2
    _, doc = run_json(capsys, 'table', 'trinomial')
    rows = {r['params']['n']: r for r in doc['payload']['tables'][0]['rows']}
    assert len(rows) == 7
    assert rows[18]['degrees'] == [18, 15, 14, 14, 12, 12, 12, 12, 0] and rows[18]['length'] == 9
    _, doc = run_json(capsys, 'table', 'remark')
    assert [r['degrees'] for r in doc['payload']['tables'][0]['rows']] == [[8, 7, 5, 5, 4, 3, 0], [8, 6, 6, 0]]


def test_table_mismatch_diff(capsys, monkeypatch):
    real = cli.tables.reproduce

    def skewed(table_id, max_steps):
        res = real(table_id, max_steps)
        res.rows[0].expected_length += 1
        return res

    monkeypatch.setattr(cli.tables, 'reproduce', skewed)
    code, out, _ = run(capsys, 'table', 'mn')
    assert code == EXIT_MISMATCH
    assert 'length: expected' in out


def test_table_unknown(capsys):
    assert run(capsys, 'table', 'nope')[0] == EXIT_USAGE


# ---------- scan / count

def test_scan_json(capsys):
    code, doc = run_json(capsys, 'scan', '1', '12', '--workers', '4')
    assert code == EXIT_OK
    assert doc['payload']['violations'] == []
    assert doc['payload']['total'] == 2 ** 13 - 2


def test_scan_csv(capsys):
    code, out, _ = run(capsys, 'scan', '5', '5', '--class', 'odd', '--format', 'csv')
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.split('\n\n')[0])))
    assert rows[0]['count'] == '8' and rows[0]['expected_count'] == '8'


@pytest.mark.parametrize('argv', [['scan', '3', '2'], ['scan', '0', '3'], ['scan', '1', '40'],
                                  ['scan', '1', '3', '--workers', '0']])
def test_scan_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_scan_out_file(capsys, tmp_path):
    target = tmp_path / 'scan.json'
    code, out, _ = run(capsys, 'scan', '2', '4', '--format', 'json', '--out', str(target))
    assert code == EXIT_OK and out == ''
    doc = json.loads(target.read_text())
    jsonschema.validate(doc, SCHEMA)
    assert doc['payload']['class_counts'] == {'2': 4, '3': 8, '4': 16}


def test_out_unwritable(capsys, tmp_path):
    code, _, err = run(capsys, 'length', 'x^3+x+1', '--out', str(tmp_path / 'missing' / 'f.txt'))
    assert code == EXIT_USAGE and 'I/O error' in err


def test_count(capsys):
    code, doc = run_json(capsys, 'count', '5', '--class', 'odd')
    assert code == EXIT_OK
    assert doc['payload']['closed_form'] == doc['payload']['enumerated'] == 8
    assert run(capsys, 'count', '1', '--class', 'odd')[0] == EXIT_USAGE


def test_global_flags_before_or_after_subcommand(capsys):
    a = run(capsys, '--format', 'json', 'length', 'x^3+x+1')[1]
    b = run(capsys, 'length', 'x^3+x+1', '--format', 'json')[1]
    assert json.loads(a)['payload'] == json.loads(b)['payload']


def test_module_entry_point():
    proc = subprocess.run([sys.executable, '-m', 'gf2collatz', 'length', 'x^8+x^3+1'],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.strip() == 'Length 7'


def test_no_command_is_usage_error(capsys):
    assert run(capsys)[0] == EXIT_USAGE
