import csv
import io
import json

import numpy as np
import pytest

from web.report_generator import emit_report, generate_csv_report, generate_json_report, write_atomic

RATIO_REPORT = {
    'scenario': 'scan',
    'passed': True,
    'outputs': {'table': [{'x': [1.0, -1.0], 'ratio': 2.0}, {'x': [0.0, 1.0], 'ratio': 1.0, 'note': 'edge'}]},
}


def _rows(buffer):
    text = buffer.getvalue().decode('utf-8-sig')
    return list(csv.reader(io.StringIO(text)))


def test_json_report_handles_numpy_and_vectors(l1_2):
    report = {'vector': l1_2.vector([1.0, 2.0]), 'array': np.arange(3), 'scalar': np.float64(0.5),
              'pair': (1, 2), 'labels': {'e'}}
    assert json.loads(generate_json_report(report)) == {
        'vector': [1.0, 2.0], 'array': [0, 1, 2], 'scalar': 0.5, 'pair': [1, 2], 'labels': ['e'],
    }
    with pytest.raises(TypeError):
        generate_json_report({'bad': object()})


def test_csv_block_per_table():
    rows = _rows(generate_csv_report(RATIO_REPORT))
    assert rows[0] == ['scenario: scan']
    assert rows[1] == ['x', 'ratio', 'note']
    assert rows[2] == ['[1.0, -1.0]', '2.0', '']
    assert rows[3] == ['[0.0, 1.0]', '1.0', 'edge']
    assert rows[4] == []


def test_csv_of_a_batch_skips_reports_without_tables():
    batch = {'reports': [RATIO_REPORT, {'scenario': 'plain', 'outputs': {'norm': 1.0}},
                         {'scenario': 'failed', 'error': {'kind': 'order'}}]}
    rows = _rows(generate_csv_report(batch))
    assert [row for row in rows if row and row[0].startswith('scenario:')] == [['scenario: scan']]
    assert _rows(generate_csv_report({'reports': []})) == []


def test_write_atomic(tmp_path):
    path = tmp_path / 'nested' / 'report.json'
    write_atomic(str(path), 'first')
    write_atomic(str(path), 'second')
    assert path.read_text(encoding='utf-8') == 'second'
    assert [p.name for p in path.parent.iterdir()] == ['report.json']


def test_emit_report(tmp_path):
    out, table = tmp_path / 'r.json', tmp_path / 'r.csv'
    text = emit_report(RATIO_REPORT, str(out), str(table))
    assert json.loads(out.read_text(encoding='utf-8')) == json.loads(text)
    assert table.read_bytes().startswith(b'\xef\xbb\xbf')
    assert emit_report(RATIO_REPORT) == text
