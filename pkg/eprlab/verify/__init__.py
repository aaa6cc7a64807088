from flask import Blueprint


verify_bp = Blueprint("verify", __name__, cli_group="verify")

from . import commands  # noqa: E402,F401
