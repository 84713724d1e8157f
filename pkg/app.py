from flask import Flask, jsonify

from config import Config
from database import init_db
from utils.logging_config import configure_root_logger
from web.api import api_bp


def create_app(config_overrides=None):
    app = Flask(__name__)
    app.config.from_object(Config)
    if config_overrides:
        app.config.update(config_overrides)

    # File and console handlers on the root logger, shared with the library modules
    configure_root_logger(app.config['LOGGING_LEVEL'], app.config['LOG_DIR'])
    app.logger.info('orba report service startup')

    init_db(app.config['DATABASE_PATH'])
    app.register_blueprint(api_bp)

    @app.route('/health')
    def health():
        return jsonify({'status': 'ok', 'schema_version': app.config['REPORT_SCHEMA_VERSION']})

    return app
