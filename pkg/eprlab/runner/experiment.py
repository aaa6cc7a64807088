import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, replace

from ..config import EXPERIMENT_KEYS, default_settings
from ..errors import ConfigurationError
from ..families.manifest import model_from_manifest
from ..sde.laws import InitialLaw
from ..sde.noise import UINT64_LIMIT


KINDS = (
    "simulate",
    "estimate",
    "clt",
    "mdp",
    "lil",
    "verify-harnack",
    "verify-ibp",
    "verify-coupling",
    "verify-martingale",
    "verify-moments",
)

TOP_LEVEL = {
    "kind",
    "model",
    "initial",
    "horizons",
    "replicas",
    "h",
    "seed",
    "workers",
    "out_dir",
    "burn_in",
    "epr_reference",
    "noise_block",
}
OPTION_TABLES = {"estimate", "clt", "mdp", "lil", "verify"}
REFERENCES = ("closed-form", "discrete", "stationary-mc")


def _positive_int(value, field_name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"expected an integer, got {value!r}", field=field_name)
    if value < minimum:
        raise ConfigurationError(f"must be >= {minimum}", field=field_name)
    return value


def _number(value, field_name):
    if isinstance(value, bool):
        raise ConfigurationError(f"not a number: {value!r}", field=field_name)
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"not a number: {value!r}", field=field_name) from exc


def _positive_float(value, field_name):
    value = _number(value, field_name)
    if not (value > 0.0 and math.isfinite(value)):
        raise ConfigurationError("must be a finite number > 0", field=field_name)
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    model: dict
    initial: InitialLaw = field(default_factory=InitialLaw)
    horizons: tuple = (1.0,)
    replicas: int = 1000
    h: float = 1e-3
    seed: int = 0
    workers: int = 1
    out_dir: str = "runs"
    burn_in: float = None
    epr_reference: object = "closed-form"
    noise_block: int = 1024
    options: dict = field(default_factory=dict)

    def validate(self):
        """Check every field before any compute; errors carry the dotted field path."""
        if self.kind not in KINDS:
            raise ConfigurationError(f"must be one of {', '.join(KINDS)}", field="kind")
        _positive_int(self.replicas, "replicas")
        _positive_int(self.workers, "workers")
        _positive_int(self.noise_block, "noise_block")
        _positive_float(self.h, "h")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < UINT64_LIMIT:
            raise ConfigurationError("must be an unsigned 64-bit integer", field="seed")
        if not self.horizons:
            raise ConfigurationError("at least one horizon is required", field="horizons")
        for index, t in enumerate(self.horizons):
            if _positive_float(t, f"horizons.{index}") < self.h:
                raise ConfigurationError(f"horizon {t} is shorter than h", field=f"horizons.{index}")
        if self.burn_in is not None and not _number(self.burn_in, "burn_in") >= 0.0:
            raise ConfigurationError("must be >= 0", field="burn_in")
        reference = self.epr_reference
        if not (reference in REFERENCES or (isinstance(reference, (int, float)) and not isinstance(reference, bool))):
            raise ConfigurationError(
                f"must be one of {', '.join(REFERENCES)} or a number", field="epr_reference"
            )
        for name in self.options:
            if name not in OPTION_TABLES:
                raise ConfigurationError(f"unknown table [{name}]", field=name)

        model = self.build_model()
        self.initial.validate(model.dim)
        if self.kind == "lil" and max(self.horizons) < math.e**2:
            raise ConfigurationError("the LIL scan needs a horizon of at least e^2", field="horizons")
        if self.kind == "mdp":
            exponent = _number(self.section("mdp").get("lambda_exponent", 0.15), "mdp.lambda_exponent")
            if not 0.0 < exponent < 0.5:
                raise ConfigurationError("must lie in (0, 1/2)", field="mdp.lambda_exponent")
        if self.kind == "verify-harnack":
            p = _number(self.section("verify").get("p", 2.0), "verify.p")
            if not p > 1.0:
                raise ConfigurationError("must be > 1", field="verify.p")
        return self

    def build_model(self):
        return model_from_manifest(self.model)

    def section(self, name):
        return self.options.get(name, {})

    def to_dict(self):
        return {
            "kind": self.kind,
            "model": self.model,
            "initial": self.initial.to_dict(),
            "horizons": [float(t) for t in self.horizons],
            "replicas": self.replicas,
            "h": self.h,
            "seed": self.seed,
            "workers": self.workers,
            "out_dir": str(self.out_dir),
            "burn_in": self.burn_in,
            "epr_reference": self.epr_reference,
            "noise_block": self.noise_block,
            "options": self.options,
        }


def read_toml(path):
    try:
        with open(path, "rb") as handle:
            return tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"no such file {path}", field="config") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"invalid TOML: {exc}", field="config") from exc


def load_experiment(kind=None, path=None, settings=None, env_overrides=(), flags=None):
    """Assemble an ExperimentConfig.

    Precedence, lowest first: ``settings`` defaults, the TOML file at ``path``,
    keys named in ``env_overrides`` (taken from ``settings``), then ``flags``.
    """
    settings = settings or default_settings()
    data = {EXPERIMENT_KEYS[key]: settings[key] for key in EXPERIMENT_KEYS if key in settings}
    document = read_toml(path) if path else {}

    unknown = set(document) - TOP_LEVEL - OPTION_TABLES
    if unknown:
        raise ConfigurationError(f"unknown keys {sorted(unknown)}", field="config")
    data.update({k: v for k, v in document.items() if k in TOP_LEVEL})
    for key in env_overrides:
        if key in EXPERIMENT_KEYS:
            data[EXPERIMENT_KEYS[key]] = settings[key]
    data.update({k: v for k, v in (flags or {}).items() if v is not None})

    if kind is not None:
        if document.get("kind", kind) != kind:
            raise ConfigurationError(
                f"file declares kind {document['kind']!r} but {kind!r} was requested", field="kind"
            )
        data["kind"] = kind
    if "kind" not in data:
        raise ConfigurationError("missing", field="kind")
    if "model" not in data:
        raise ConfigurationError("missing", field="model")

    if not isinstance(data["model"], dict):
        raise ConfigurationError("expected a table", field="model")
    model = dict(data["model"])
    model.setdefault("fd_step", settings.get("FD_STEP", 1e-5))
    horizons = data.get("horizons", (1.0,))
    if isinstance(horizons, (int, float)):
        horizons = (horizons,)

    config = ExperimentConfig(
        kind=data["kind"],
        model=model,
        initial=InitialLaw.from_mapping(data.get("initial")),
        horizons=tuple(_number(t, f"horizons.{index}") for index, t in enumerate(horizons)),
        replicas=data.get("replicas", 1000),
        h=data.get("h", 1e-3),
        seed=data.get("seed", 0),
        workers=data.get("workers", 1),
        out_dir=str(data.get("out_dir", "runs")),
        burn_in=data.get("burn_in"),
        epr_reference=data.get("epr_reference", "closed-form"),
        noise_block=data.get("noise_block", 1024),
        options={name: document[name] for name in OPTION_TABLES if name in document},
    )
    return config.validate()


def with_out_dir(config, out_dir):
    return replace(config, out_dir=str(out_dir))
