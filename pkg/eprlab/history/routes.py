from flask import Response, jsonify

from . import history_bp
from ..extensions import db
from ..models import Run
from ..utils.pdf import render_run_pdf


@history_bp.route("/")
def runs():
    rows = Run.query.order_by(Run.created_at.desc(), Run.id.desc()).all()
    return jsonify([run.summary() for run in rows])


@history_bp.route("/<int:run_id>")
def run_detail(run_id):
    run = db.get_or_404(Run, run_id)
    data = run.summary()
    data["config"] = run.config
    data["reports"] = {report.name: report.data for report in run.reports}
    return jsonify(data)


@history_bp.route("/<int:run_id>/pdf")
def run_pdf(run_id):
    run = db.get_or_404(Run, run_id)
    filename = f"run_{run.id}_{run.kind}.pdf"
    return Response(
        render_run_pdf(run),
        mimetype="application/pdf",
        headers={"Content-Disposition": f"attachment; filename={filename}"},
    )
