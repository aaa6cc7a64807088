import os

import click
from flask import current_app

from . import history_bp
from ..extensions import db
from ..models import Run
from ..utils.pdf import render_run_pdf


@history_bp.cli.command("history")
@click.option("--limit", type=int, default=20, show_default=True)
def history(limit):
    """List recorded runs, newest first."""
    runs = Run.query.order_by(Run.created_at.desc(), Run.id.desc()).limit(limit).all()
    if not runs:
        click.echo("no runs recorded")
        return
    for run in runs:
        click.echo(
            f"{run.id:>5}  {run.created_at:%Y-%m-%d %H:%M}  {run.kind:<18} "
            f"{run.status:<8} exit={run.exit_code}  n={run.replicas}  {run.out_dir}"
        )


@history_bp.cli.command("export-pdf")
@click.argument("run_id", type=int)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Defaults to report.pdf in the run directory.")
def export_pdf(run_id, out_path):
    """Render the reports of a run into a PDF table."""
    run = db.session.get(Run, run_id)
    if run is None:
        click.echo(f"error: no run {run_id}", err=True)
        raise click.exceptions.Exit(1)
    out_path = out_path or os.path.join(run.out_dir, "report.pdf")
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    with open(out_path, "wb") as handle:
        handle.write(render_run_pdf(run))
    current_app.logger.info("run %d exported to %s", run.id, out_path)
    click.echo(out_path)
