from . import experiments_bp
from ..utils.runs import execute, experiment_options, finish


@experiments_bp.cli.command("simulate")
@experiment_options
def simulate(config_path, flags):
    """Simulate an ensemble and write the EPR samples."""
    finish(execute("simulate", config_path, flags))


@experiments_bp.cli.command("estimate")
@experiment_options
def estimate(config_path, flags):
    """Estimate R and delta and compare them with the closed forms."""
    finish(execute("estimate", config_path, flags))


@experiments_bp.cli.command("clt")
@experiment_options
def clt(config_path, flags):
    """Kolmogorov-Smirnov test of S_t / sqrt(t delta) against N(0, 1)."""
    finish(execute("clt", config_path, flags))


@experiments_bp.cli.command("mdp")
@experiment_options
def mdp(config_path, flags):
    """Normalised tail probabilities against the moderate deviation rate."""
    finish(execute("mdp", config_path, flags))


@experiments_bp.cli.command("lil")
@experiment_options
def lil(config_path, flags):
    """Running sup of S_t over the iterated-logarithm envelope."""
    finish(execute("lil", config_path, flags))
