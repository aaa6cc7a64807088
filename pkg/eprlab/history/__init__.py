from flask import Blueprint


history_bp = Blueprint("history", __name__, cli_group=None)

from . import commands, routes  # noqa: E402,F401
