import os


class Config:
    BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
    SQLALCHEMY_DATABASE_URI = os.getenv(
        "DATABASE_URL",
        f"sqlite:///{os.path.join(BASE_DIR, 'eprlab.db')}",
    )
    SQLALCHEMY_TRACK_MODIFICATIONS = False

    STEP_SIZE = 1e-3
    SEED = 20180807
    REPLICAS = 1000
    WORKERS = 1
    NOISE_BLOCK = 1024
    OUT_DIR = os.path.join(BASE_DIR, "runs")

    LIL_THETA = 0.9
    LIL_MARGIN = 0.25
    MDP_MIN_HITS = 50
    KS_ALPHA = 0.01
    COUPLING_EPS = 1e-8
    FD_STEP = 1e-5


# Keys an EPRLAB_* variable may override for a single experiment.
EXPERIMENT_KEYS = {
    "STEP_SIZE": "h",
    "SEED": "seed",
    "REPLICAS": "replicas",
    "WORKERS": "workers",
    "OUT_DIR": "out_dir",
    "NOISE_BLOCK": "noise_block",
}

SETTING_KEYS = (
    "LIL_THETA",
    "LIL_MARGIN",
    "MDP_MIN_HITS",
    "KS_ALPHA",
    "COUPLING_EPS",
    "FD_STEP",
)


def default_settings():
    return {key: getattr(Config, key) for key in (*EXPERIMENT_KEYS, *SETTING_KEYS)}
