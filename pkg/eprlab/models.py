import json
from datetime import datetime

from .extensions import db


class Run(db.Model):
    id = db.Column(db.Integer, primary_key=True)
    kind = db.Column(db.String(40), nullable=False)
    status = db.Column(db.String(20), default="running", nullable=False)
    exit_code = db.Column(db.Integer)
    # Seeds are unsigned 64-bit; SQLite integers are signed.
    seed = db.Column(db.String(24), nullable=False)
    replicas = db.Column(db.Integer, nullable=False)
    workers = db.Column(db.Integer, default=1, nullable=False)
    out_dir = db.Column(db.String(500), nullable=False)
    config_json = db.Column(db.Text, nullable=False)
    error = db.Column(db.Text)
    created_at = db.Column(db.DateTime, default=datetime.utcnow, nullable=False)
    completed_at = db.Column(db.DateTime)

    reports = db.relationship(
        "RunReport", backref="run", cascade="all, delete-orphan", order_by="RunReport.id"
    )

    @property
    def config(self):
        return json.loads(self.config_json)

    def summary(self):
        return {
            "id": self.id,
            "kind": self.kind,
            "status": self.status,
            "exit_code": self.exit_code,
            "seed": self.seed,
            "replicas": self.replicas,
            "workers": self.workers,
            "out_dir": self.out_dir,
            "created_at": self.created_at.isoformat(timespec="seconds"),
            "completed_at": self.completed_at.isoformat(timespec="seconds") if self.completed_at else None,
        }


class RunReport(db.Model):
    id = db.Column(db.Integer, primary_key=True)
    run_id = db.Column(db.Integer, db.ForeignKey("run.id"), nullable=False)
    name = db.Column(db.String(80), nullable=False)
    passed = db.Column(db.Boolean)
    payload = db.Column(db.Text, nullable=False)

    __table_args__ = (db.UniqueConstraint("run_id", "name", name="uq_run_report"),)

    @property
    def data(self):
        return json.loads(self.payload)
