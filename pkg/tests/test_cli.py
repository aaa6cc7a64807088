import json

from eprlab import create_app
from eprlab.extensions import db
from eprlab.models import Run


SIMULATE = """
kind = "simulate"
horizons = [0.5]
replicas = 8
h = 0.01
seed = 3
burn_in = 0.0

[model]
family = "rotated-ou"
a = 1.0
beta = 1.0
"""

MARTINGALE = """
kind = "verify-martingale"
horizons = [0.05]
replicas = 400
h = 0.005
seed = 12
burn_in = 0.0

[model]
family = "rotated-ou"
a = 1.0
beta = 1.0
"""


def test_simulate_command_records_a_run(app, cli, write_config, tmp_path):
    out = tmp_path / "sim"
    result = cli.invoke(args=["simulate", "--config", write_config(SIMULATE), "--out", str(out), "--replicas", "6"])
    assert result.exit_code == 0, result.output
    assert "passed" in result.output
    assert (out / "samples.csv").exists()

    with app.app_context():
        run = db.session.get(Run, 1)
        assert run.kind == "simulate"
        assert run.status == "passed"
        assert run.replicas == 6
        assert run.seed == "3"
        assert run.config["replicas"] == 6
        assert {report.name for report in run.reports} == {"simulate", "reference"}


def test_bad_config_exits_with_one(app, cli, write_config):
    result = cli.invoke(args=["estimate", "--config", write_config('kind = "estimate"\n')])
    assert result.exit_code == 1
    assert "model" in result.output
    with app.app_context():
        assert Run.query.count() == 0


def test_run_error_is_recorded(app, cli, write_config, tmp_path):
    text = 'kind = "simulate"\nreplicas = 4\nh = 0.01\n[model]\nfamily = "free"\n'
    result = cli.invoke(args=["simulate", "--config", write_config(text), "--out", str(tmp_path / "free")])
    assert result.exit_code == 1
    with app.app_context():
        run = Run.query.one()
        assert run.status == "error"
        assert json.loads(run.error)["field"] == "epr_reference"


def test_verify_group(app, cli, write_config, tmp_path):
    out = tmp_path / "martingale"
    result = cli.invoke(args=["verify", "martingale", "--config", write_config(MARTINGALE), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert (out / "martingale.tsv").exists()
    with app.app_context():
        assert Run.query.one().kind == "verify-martingale"


def test_history_and_pdf_export(app, cli, write_config, tmp_path):
    assert "no runs recorded" in cli.invoke(args=["history"]).output
    cli.invoke(args=["simulate", "--config", write_config(SIMULATE), "--out", str(tmp_path / "sim")])

    listing = cli.invoke(args=["history"])
    assert "simulate" in listing.output

    pdf_path = tmp_path / "report.pdf"
    result = cli.invoke(args=["export-pdf", "1", "--out", str(pdf_path)])
    assert result.exit_code == 0, result.output
    assert pdf_path.read_bytes().startswith(b"%PDF")

    missing = cli.invoke(args=["export-pdf", "42"])
    assert missing.exit_code == 1


def test_history_routes(app, cli, write_config, tmp_path):
    cli.invoke(args=["simulate", "--config", write_config(SIMULATE), "--out", str(tmp_path / "sim")])
    client = app.test_client()

    listing = client.get("/runs/")
    assert listing.status_code == 200
    assert listing.get_json()[0]["kind"] == "simulate"

    detail = client.get("/runs/1").get_json()
    assert detail["reports"]["reference"]["source"] == "closed-form"
    assert detail["config"]["horizons"] == [0.5]

    pdf = client.get("/runs/1/pdf")
    assert pdf.mimetype == "application/pdf"
    assert "attachment" in pdf.headers["Content-Disposition"]
    assert client.get("/runs/7").status_code == 404


def test_environment_override_is_recorded_in_the_manifest(monkeypatch, write_config, tmp_path):
    monkeypatch.setenv("EPRLAB_KS_ALPHA", "0.002")
    app = create_app({"TESTING": True, "SQLALCHEMY_DATABASE_URI": "sqlite:///:memory:"})
    assert "KS_ALPHA" in app.config["ENV_OVERRIDES"]
    out = tmp_path / "sim"
    result = app.test_cli_runner().invoke(args=["simulate", "--config", write_config(SIMULATE), "--out", str(out)])
    assert result.exit_code == 0, result.output
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["settings"]["KS_ALPHA"] == 0.002
    assert manifest["settings"]["LIL_THETA"] == app.config["LIL_THETA"]


def test_verify_commands_have_help_text(cli):
    for command, text in (
        ("ibp", "Bismut"),
        ("martingale", "Girsanov weight"),
        ("moments", "Exponential moments"),
    ):
        result = cli.invoke(args=["verify", command, "--help"])
        assert result.exit_code == 0
        assert text in result.output
