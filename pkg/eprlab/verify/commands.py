from . import verify_bp
from ..utils.runs import execute, experiment_options, finish


@verify_bp.cli.command("harnack")
@experiment_options
def harnack(config_path, flags):
    """Power Harnack inequality over the registered grid."""
    finish(execute("verify-harnack", config_path, flags))


@verify_bp.cli.command("ibp")
@experiment_options
def ibp(config_path, flags):
    """Bismut integration-by-parts identity for the registered test functions."""
    finish(execute("verify-ibp", config_path, flags))


@verify_bp.cli.command("coupling")
@experiment_options
def coupling(config_path, flags):
    """Coupling by change of measure: meeting times and the gap bound."""
    finish(execute("verify-coupling", config_path, flags))


@verify_bp.cli.command("martingale")
@experiment_options
def martingale(config_path, flags):
    """Girsanov weight M_t against its mean of one, optionally under a halved step."""
    finish(execute("verify-martingale", config_path, flags))


@verify_bp.cli.command("moments")
@experiment_options
def moments(config_path, flags):
    """Exponential moments of the path and of psi under the stationary law."""
    finish(execute("verify-moments", config_path, flags))
