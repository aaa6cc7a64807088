import json
from datetime import datetime
from functools import wraps

import click
from flask import current_app

from ..config import EXPERIMENT_KEYS, SETTING_KEYS
from ..errors import EprLabError
from ..extensions import db
from ..models import Run, RunReport
from ..runner.artifacts import dumps
from ..runner.experiment import load_experiment
from ..runner.pipeline import run_experiment


def experiment_options(command):
    """The flags every experiment command accepts; they override file and environment values."""

    @click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Experiment TOML.")
    @click.option("--seed", type=int, help="Master seed.")
    @click.option("--replicas", type=int, help="Number of replicas.")
    @click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Output directory.")
    @click.option("--workers", type=int, help="Worker processes.")
    @wraps(command)
    def wrapper(config_path, seed, replicas, out_dir, workers):
        flags = {"seed": seed, "replicas": replicas, "out_dir": out_dir, "workers": workers}
        return command(config_path, flags)

    return wrapper


def current_settings():
    return {key: current_app.config[key] for key in (*EXPERIMENT_KEYS, *SETTING_KEYS)}


def _report_passed(payload):
    if isinstance(payload, dict) and "pass" in payload:
        return bool(payload["pass"])
    return None


def execute(kind, config_path, flags):
    """Load, run and record one experiment; returns the process exit code."""
    logger = current_app.logger
    settings = current_settings()
    try:
        config = load_experiment(
            kind,
            config_path,
            settings=settings,
            env_overrides=current_app.config.get("ENV_OVERRIDES", ()),
            flags=flags,
        )
    except EprLabError as exc:
        logger.error("invalid %s configuration: %s", kind, exc)
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code

    run = Run(
        kind=kind,
        status="running",
        seed=str(config.seed),
        replicas=config.replicas,
        workers=config.workers,
        out_dir=str(config.out_dir),
        config_json=json.dumps(config.to_dict(), sort_keys=True),
    )
    db.session.add(run)
    db.session.commit()
    logger.info(
        "run %d: %s, %d replicas, %d workers, out %s",
        run.id, kind, config.replicas, config.workers, config.out_dir,
    )

    try:
        result = run_experiment(config, settings)
    except EprLabError as exc:
        logger.error("run %d: %s", run.id, exc)
        run.status = "error"
        run.exit_code = exc.exit_code
        run.error = str(exc)
        run.completed_at = datetime.utcnow()
        db.session.commit()
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code

    for name, payload in sorted(result.reports.items()):
        db.session.add(
            RunReport(run_id=run.id, name=name, passed=_report_passed(payload), payload=dumps(payload))
        )
    run.status = result.status
    run.exit_code = result.exit_code
    run.error = None if result.error is None else json.dumps(result.error, sort_keys=True)
    run.completed_at = datetime.utcnow()
    db.session.commit()

    if result.error:
        logger.error("run %d stopped: %s", run.id, result.error["message"])
        click.echo(f"error: {result.error['message']}", err=True)
    else:
        logger.info("run %d %s", run.id, result.status)
    click.echo(f"run {run.id} {result.status} (exit {result.exit_code}): {result.out_dir}")
    return result.exit_code


def finish(code):
    if code:
        raise click.exceptions.Exit(code)
