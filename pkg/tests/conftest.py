import numpy as np
import pytest

from eprlab import create_app
from eprlab.extensions import db
from eprlab.families import FreeBrownian, LinearOU, model_from_manifest


ROTATED_OU = {"family": "rotated-ou", "a": 1.0, "beta": 1.0}


@pytest.fixture
def app(tmp_path):
    app = create_app(
        {
            "TESTING": True,
            "SQLALCHEMY_DATABASE_URI": "sqlite:///:memory:",
            "OUT_DIR": str(tmp_path / "runs"),
            "ENV_OVERRIDES": (),
        }
    )
    yield app
    with app.app_context():
        db.session.remove()
        db.drop_all()


@pytest.fixture
def cli(app):
    return app.test_cli_runner()


@pytest.fixture
def rotated_ou():
    return model_from_manifest(ROTATED_OU)


@pytest.fixture
def reversible_ou():
    return LinearOU(np.diag([-1.0, -2.0]))


@pytest.fixture
def free_bm():
    return FreeBrownian(2)


@pytest.fixture
def write_config(tmp_path):
    """Write an experiment TOML and return its path."""

    def write(text, name="experiment.toml"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write
