import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from flask import Flask

from .config import Config, EXPERIMENT_KEYS, SETTING_KEYS
from .extensions import db


__version__ = "0.1.0"


def create_app(overrides=None):
    app = Flask(__name__)
    app.config.from_object(Config)

    settings_path = os.getenv("EPRLAB_SETTINGS")
    if settings_path:
        app.config.from_file(settings_path, load=tomllib.load, text=False)

    before = {key: app.config.get(key) for key in (*EXPERIMENT_KEYS, *SETTING_KEYS)}
    app.config.from_prefixed_env("EPRLAB")
    app.config.pop("SETTINGS", None)
    app.config["ENV_OVERRIDES"] = tuple(
        key for key, value in before.items() if app.config.get(key) != value
    )

    if overrides:
        app.config.update(overrides)

    db.init_app(app)

    from .experiments import experiments_bp
    from .history import history_bp
    from .verify import verify_bp

    app.register_blueprint(experiments_bp)
    app.register_blueprint(verify_bp)
    app.register_blueprint(history_bp, url_prefix="/runs")

    with app.app_context():
        db.create_all()

    return app
