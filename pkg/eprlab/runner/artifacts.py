import csv
import hashlib
import json
import math
import os
import platform
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..errors import ConfigurationError


SAMPLE_COLUMNS = ("replica", "t", "R_t", "S_t", "S_t_sec3", "log_M_t")


def code_version():
    return __version__


def json_safe(value):
    """Plain JSON types only; numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return json_safe(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def dumps(payload):
    return json.dumps(json_safe(payload), sort_keys=True, indent=2) + "\n"


def digest(payload):
    return hashlib.sha256(json.dumps(json_safe(payload), sort_keys=True).encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    config: dict
    stream_ids: list
    seed: int
    realized_horizons: list = field(default_factory=list)
    wall_clock: float = None
    version: str = field(default_factory=code_version)
    status: str = "running"
    exit_code: int = None
    files: list = field(default_factory=list)
    settings: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "config": self.config,
            "config_sha256": digest(self.config),
            "settings": self.settings,
            "resolved_options": self.options,
            "seed": self.seed,
            "stream_ids": self.stream_ids,
            "realized_horizons": self.realized_horizons,
            "wall_clock_seconds": self.wall_clock,
            "version": self.version,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "status": self.status,
            "exit_code": self.exit_code,
            "files": sorted(self.files),
        }


class ArtifactSet:
    """The files written for one run, all under ``out_dir``."""

    def __init__(self, out_dir):
        self.out_dir = str(out_dir)
        try:
            os.makedirs(self.out_dir, exist_ok=True)
        except OSError as exc:
            raise ConfigurationError(f"cannot create {self.out_dir}: {exc}", field="out_dir") from exc
        self.files = []
        self.reports = {}

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def _track(self, name):
        if name not in self.files:
            self.files.append(name)
        return self.path(name)

    def write_json(self, name, payload):
        with open(self._track(name), "w", encoding="utf-8", newline="\n") as handle:
            handle.write(dumps(payload))

    def add_report(self, name, payload):
        self.reports[name] = json_safe(payload)

    def write_reports(self, name="report.json"):
        self.write_json(name, self.reports)

    def write_samples(self, samples, name="samples.csv"):
        """``samples`` is a list of FunctionalSample over replicas; rows go replica by replica."""
        with open(self._track(name), "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(SAMPLE_COLUMNS)
            columns = [list(sample.rows()) for sample in samples]
            for per_replica in zip(*columns):
                for replica, *values in per_replica:
                    writer.writerow([replica, *(repr(v) for v in values)])

    def write_tsv(self, name, header, rows):
        with open(self._track(name), "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])

    def write_manifest(self, manifest):
        manifest.files = [f for f in self.files if f != "manifest.json"] + ["manifest.json"]
        self.write_json("manifest.json", manifest.to_dict())


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value
