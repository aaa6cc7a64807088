from flask import Blueprint


experiments_bp = Blueprint("experiments", __name__, cli_group=None)

from . import commands  # noqa: E402,F401
