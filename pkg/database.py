import sqlite3
import os
import json
from typing import List, Dict, Optional

from config import Config
from web.report_generator import generate_json_report


def _path(path: Optional[str]) -> str:
    return path or Config.DATABASE_PATH


def init_db(path: Optional[str] = None):
    """Initialize the report store"""
    db_path = _path(path)
    # Ensure the directory for the database exists
    db_dir = os.path.dirname(db_path)
    if db_dir and not os.path.exists(db_dir):
        os.makedirs(db_dir, exist_ok=True)

    conn = sqlite3.connect(db_path)
    cursor = conn.cursor()

    cursor.execute('''
        CREATE TABLE IF NOT EXISTS reports (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            scenario TEXT NOT NULL,
            operation TEXT,
            passed BOOLEAN NOT NULL,
            seed INTEGER,
            schema_version TEXT NOT NULL,
            payload TEXT NOT NULL,
            created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
        )
    ''')

    cursor.execute('CREATE INDEX IF NOT EXISTS idx_scenario ON reports(scenario)')
    cursor.execute('CREATE INDEX IF NOT EXISTS idx_passed ON reports(passed)')
    cursor.execute('CREATE INDEX IF NOT EXISTS idx_created_at ON reports(created_at)')

    conn.commit()
    conn.close()


def save_report(report: Dict, path: Optional[str] = None) -> str:
    """
    Store a run or batch report
    Returns the ID of the stored row
    """
    conn = sqlite3.connect(_path(path))
    cursor = conn.cursor()

    batch = 'reports' in report
    data = (
        'batch' if batch else report.get('scenario', ''),
        None if batch else report.get('operation'),
        bool(report.get('passed')),
        None if batch else report.get('seed'),
        report.get('schema_version', Config.REPORT_SCHEMA_VERSION),
        generate_json_report(report),
    )
    cursor.execute('''
        INSERT INTO reports (scenario, operation, passed, seed, schema_version, payload)
        VALUES (?, ?, ?, ?, ?, ?)
    ''', data)
    report_id = cursor.lastrowid

    conn.commit()
    conn.close()
    return str(report_id)


def _row_to_dict(row, with_payload: bool) -> Dict:
    summary = {
        'id': str(row[0]),
        'scenario': row[1],
        'operation': row[2],
        'passed': bool(row[3]),
        'seed': row[4],
        'schema_version': row[5],
        'created_at': row[6],
    }
    if with_payload:
        summary['report'] = json.loads(row[7])
    return summary


def get_report(report_id: str, path: Optional[str] = None) -> Optional[Dict]:
    """
    Get one stored report with its payload
    """
    conn = sqlite3.connect(_path(path))
    cursor = conn.cursor()
    cursor.execute('''
        SELECT id, scenario, operation, passed, seed, schema_version, created_at, payload
        FROM reports WHERE id = ?
    ''', (report_id,))
    row = cursor.fetchone()
    conn.close()
    return _row_to_dict(row, True) if row else None


def list_reports(limit: int = 50, path: Optional[str] = None) -> List[Dict]:
    """
    Most recent reports first, without payloads
    """
    conn = sqlite3.connect(_path(path))
    cursor = conn.cursor()
    cursor.execute('''
        SELECT id, scenario, operation, passed, seed, schema_version, created_at
        FROM reports
        ORDER BY id DESC
        LIMIT ?
    ''', (limit,))
    rows = cursor.fetchall()
    conn.close()
    return [_row_to_dict(row, False) for row in rows]


def delete_report(report_id: str, path: Optional[str] = None) -> bool:
    """
    Delete a stored report
    Returns True if a row was removed
    """
    conn = sqlite3.connect(_path(path))
    cursor = conn.cursor()
    cursor.execute('DELETE FROM reports WHERE id = ?', (report_id,))
    deleted = cursor.rowcount > 0
    conn.commit()
    conn.close()
    return deleted
