# -*- coding: utf-8 -*-
"""
Report rendering: JSON documents, CSV ratio tables and atomic file output
"""

import csv
import json
import os
import tempfile
from io import BytesIO, TextIOWrapper
from typing import List, Optional

import numpy as np

from models.spaces import Vector


def _plain(value):
    """json.dumps fallback for numpy scalars/arrays and vectors."""
    if isinstance(value, Vector):
        return value.tolist()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (set, tuple)):
        return list(value)
    raise TypeError(f'{type(value).__name__} is not JSON serializable')


def generate_json_report(report: dict) -> str:
    """
    JSON text of a run or batch report

    :param report: dict from run_scenario / run_batch
    :return: JSON string
    """
    return json.dumps(report, ensure_ascii=False, indent=2, default=_plain)


def _tables(report: dict) -> List[tuple]:
    """(scenario name, rows) for every report carrying a table."""
    reports = report.get('reports', [report])
    return [(item.get('scenario'), item['outputs']['table'])
            for item in reports if isinstance(item.get('outputs'), dict) and item['outputs'].get('table')]


def generate_csv_report(report: dict) -> BytesIO:
    """
    CSV export of the ratio tables in a report; one block per scenario

    :param report: run or batch report
    :return: BytesIO with the CSV file
    """
    buffer = BytesIO()
    wrapper = TextIOWrapper(buffer, encoding='utf-8-sig', newline='')
    writer = csv.writer(wrapper)

    for name, rows in _tables(report):
        columns = list(rows[0])
        for row in rows[1:]:
            columns += [key for key in row if key not in columns]
        writer.writerow([f'scenario: {name}'])
        writer.writerow(columns)
        for row in rows:
            writer.writerow([json.dumps(row[key], default=_plain) if isinstance(row.get(key), (list, dict))
                             else row.get(key, '') for key in columns])
        writer.writerow([])

    wrapper.flush()
    wrapper.detach()
    buffer.seek(0)
    return buffer


def write_atomic(path: str, data, mode: str = 'w'):
    """Write to a temporary file in the target directory, then os.replace it over path."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=directory, prefix='.orba-', suffix='.tmp')
    try:
        with os.fdopen(handle, mode, **({'encoding': 'utf-8'} if 'b' not in mode else {})) as stream:
            stream.write(data)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise


def emit_report(report: dict, out: Optional[str] = None, csv_path: Optional[str] = None) -> str:
    """
    Render a report, writing it (and its CSV tables) atomically when paths are given

    :return: the JSON text
    """
    text = generate_json_report(report)
    if out:
        write_atomic(out, text + '\n')
    if csv_path:
        write_atomic(csv_path, generate_csv_report(report).getvalue(), mode='wb')
    return text
