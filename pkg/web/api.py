# -*- coding: utf-8 -*-
"""
Report service: run scenarios over HTTP and browse the stored report history
"""

import logging

from flask import Blueprint, current_app, jsonify, request

import database
from utils.errors import ArgumentError, OrbaError, ScenarioError
from web.report_generator import generate_json_report
from web.scenarios import describe_schema, list_examples, reproduce, run_document

logger = logging.getLogger(__name__)

api_bp = Blueprint('api', __name__, url_prefix='/api')


def _report_response(report: dict, status: int = 200):
    return current_app.response_class(generate_json_report(report), status=status, mimetype='application/json')


@api_bp.errorhandler(OrbaError)
def handle_orba_error(exc: OrbaError):
    status = 400 if isinstance(exc, (ScenarioError, ArgumentError)) else 422
    logger.warning('request failed (%s): %s', exc.kind, exc.message)
    return jsonify({'error': exc.message, 'kind': exc.kind}), status


def _store(report: dict) -> dict:
    report_id = database.save_report(report, current_app.config['DATABASE_PATH'])
    return dict(report, report_id=report_id)


def _int_arg(name: str):
    value = request.args.get(name)
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        raise ArgumentError(f'{name} must be an integer') from None


@api_bp.route('/run', methods=['POST'])
def run():
    """Run a scenario (or a list, or {"scenarios": [...]}) and store the report"""
    document = request.get_json(silent=True)
    if document is None:
        return jsonify({'error': 'request body must be a JSON scenario', 'kind': ScenarioError.kind}), 400
    report = run_document(document, seed=_int_arg('seed'), jobs=_int_arg('jobs') or 1)
    return _report_response(_store(report))


@api_bp.route('/reproduce/<example_id>')
def reproduce_example(example_id):
    """Run a bundled reproduction and store the report"""
    report = reproduce(example_id, seed=_int_arg('seed'), jobs=_int_arg('jobs') or 1)
    return _report_response(_store(report))


@api_bp.route('/examples')
def examples():
    return jsonify(list_examples())


@api_bp.route('/schema')
def schema():
    return jsonify(describe_schema())


@api_bp.route('/reports')
def reports():
    """Stored reports, most recent first"""
    limit = _int_arg('limit') or 50
    return jsonify(database.list_reports(limit, current_app.config['DATABASE_PATH']))


@api_bp.route('/reports/<report_id>')
def get_report(report_id):
    stored = database.get_report(report_id, current_app.config['DATABASE_PATH'])
    if stored:
        return jsonify(stored)
    return jsonify({'error': 'report not found'}), 404


@api_bp.route('/reports/<report_id>', methods=['DELETE'])
def delete_report(report_id):
    if database.delete_report(report_id, current_app.config['DATABASE_PATH']):
        return jsonify({'success': True})
    return jsonify({'error': 'report not found'}), 404
