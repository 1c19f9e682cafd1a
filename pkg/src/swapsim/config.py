"""Run configuration files: TOML (preferred) or JSON, schema-validated.

Every key is optional; missing values take the model defaults. Unknown keys
are rejected so that a typo never silently falls back to a default.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .chsh import AngleSettings
from .mcsim import RunConfig, pulses_for_fourfolds
from .sources import SourceParams, TimingParams
from .syncbudget import SyncBudget

OUTPUT_DIR_ENV = "SWAPSIM_OUTPUT_DIR"
DEFAULT_SEED = 1


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is set when it can be located."""

    def __init__(self, message: str, path: str | os.PathLike | None = None, line: int | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        where = ""
        if self.path:
            where = self.path + (f":{line}" if line else "") + ": "
        super().__init__(where + message)


def _schema(name: str) -> dict:
    text = resources.files("swapsim").joinpath("schemas", name).read_text(encoding="utf-8")
    return json.loads(text)


CONFIG_SCHEMA = _schema("config.schema.json")
REPORT_SCHEMA = _schema("report.schema.json")


def _locate(text: str, keys: list[str]) -> int | None:
    """Best-effort line number of a (section, key) path in TOML or JSON text."""
    if not keys:
        return None
    lines = text.splitlines()
    start = 0
    if len(keys) > 1:
        header = re.compile(rf"^\s*\[\s*{re.escape(keys[0])}\s*\]")
        for i, line in enumerate(lines):
            if header.match(line):
                start = i
                break
    key = re.compile(rf"^\s*\"?{re.escape(keys[-1])}\"?\s*[=:]")
    for i in range(start, len(lines)):
        if key.match(lines[i]):
            return i + 1
    for i, line in enumerate(lines):
        if re.search(rf"\b{re.escape(keys[-1])}\b", line):
            return i + 1
    return None


def parse_config_text(text: str, fmt: str, path: str | None = None) -> dict:
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, path, exc.lineno) from exc
    else:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            m = re.search(r"line (\d+)", str(exc))
            raise ConfigError(str(exc), path, int(m.group(1)) if m else None) from exc
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        keys = [str(k) for k in err.absolute_path]
        if err.validator == "additionalProperties":
            m = re.search(r"'([^']+)' was unexpected", err.message)
            if m:
                keys = keys + [m.group(1)]
        where = ".".join(keys) or "<root>"
        raise ConfigError(f"{where}: {err.message}", path, _locate(text, keys))
    return data


@dataclass(frozen=True)
class HomSpec:
    start_fs: float = -10_000.0
    stop_fs: float = 10_000.0
    points: int = 41
    pulses_per_point: int = 200_000
    polarizer_deg: float = 0.0

    def delays(self) -> np.ndarray:
        return np.linspace(self.start_fs, self.stop_fs, self.points)


@dataclass(frozen=True)
class ExperimentConfig:
    source_a: SourceParams = field(default_factory=SourceParams)
    source_b: SourceParams = field(default_factory=SourceParams)
    timing: TimingParams = field(default_factory=TimingParams)
    settings: AngleSettings = field(default_factory=AngleSettings)
    detection_efficiency: float = 1.0
    dark_count_prob: float = 0.0
    coincidence_window_ns: float = 2.0
    v_mode: float | None = None
    seed: int = DEFAULT_SEED
    n_pulses: int | None = None
    target_fourfolds: int | None = None
    workers: int = 1
    hom: HomSpec = field(default_factory=HomSpec)
    sync: SyncBudget = field(default_factory=SyncBudget)
    output_dir: str = "."
    formats: tuple[str, ...] = ("json", "csv")

    def run_config(self, n_pulses: int | None = None) -> RunConfig:
        cfg = RunConfig(
            n_pulses=0,
            source_a=self.source_a,
            source_b=self.source_b,
            timing=self.timing,
            detection_efficiency=self.detection_efficiency,
            dark_count_prob=self.dark_count_prob,
            coincidence_window_ns=self.coincidence_window_ns,
            rng_seed=self.seed,
            settings=self.settings,
            v_mode=self.v_mode,
            hom_polarizer_deg=self.hom.polarizer_deg,
        )
        if n_pulses is None:
            if self.n_pulses is not None:
                n_pulses = self.n_pulses
            elif self.target_fourfolds is not None:
                n_pulses = pulses_for_fourfolds(cfg, self.target_fourfolds)
            else:
                n_pulses = 0
        return replace(cfg, n_pulses=int(n_pulses))

    def hom_run_config(self) -> RunConfig:
        return replace(self.run_config(0), n_pulses=self.hom.pulses_per_point, v_mode=None)

    def resolved_output_dir(self) -> Path:
        return Path(os.environ.get(OUTPUT_DIR_ENV) or self.output_dir)


def build_config(data: dict, path: str | None = None) -> ExperimentConfig:
    """Turn validated raw data into model objects; range errors become ConfigError."""
    try:
        det = data.get("detection", {})
        run = data.get("run", {})
        out = data.get("output", {})
        cfg = ExperimentConfig(
            source_a=SourceParams(**data.get("source_a", {})),
            source_b=SourceParams(**data.get("source_b", {})),
            timing=TimingParams(**data.get("timing", {})),
            settings=AngleSettings(**data.get("angles", {})),
            detection_efficiency=det.get("efficiency", 1.0),
            dark_count_prob=det.get("dark_count_prob", 0.0),
            coincidence_window_ns=det.get("coincidence_window_ns", 2.0),
            v_mode=data.get("bsm", {}).get("v_mode"),
            seed=data.get("seed", DEFAULT_SEED),
            n_pulses=run.get("n_pulses"),
            target_fourfolds=run.get("target_fourfolds"),
            workers=run.get("workers", 1),
            hom=HomSpec(**data.get("hom", {})),
            sync=SyncBudget(**data.get("sync", {})),
            output_dir=out.get("dir", "."),
            formats=tuple(out.get("formats", ("json", "csv"))),
        )
        cfg.run_config(0)  # cross-field checks (window vs pulse period)
    except ValueError as exc:
        raise ConfigError(str(exc), path) from exc
    return cfg


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from exc
    fmt = "json" if path.suffix.lower() == ".json" else "toml"
    return build_config(parse_config_text(text, fmt, str(path)), str(path))


def config_summary(cfg: ExperimentConfig) -> dict[str, Any]:
    """Plain-data echo of the resolved configuration for reports."""

    def source(s: SourceParams) -> dict:
        return {
            "target": s.target.value,
            "state_visibility": s.state_visibility,
            "pair_probability": s.pair_probability,
            "bsm_filter_fwhm_nm": s.bsm_filter_fwhm_nm,
            "analyzer_filter_fwhm_nm": s.analyzer_filter_fwhm_nm,
            "center_wavelength_nm": s.center_wavelength_nm,
        }

    return {
        "seed": cfg.seed,
        "source_a": source(cfg.source_a),
        "source_b": source(cfg.source_b),
        "timing": dict(cfg.timing.__dict__),
        "detection": {
            "efficiency": cfg.detection_efficiency,
            "dark_count_prob": cfg.dark_count_prob,
            "coincidence_window_ns": cfg.coincidence_window_ns,
        },
        "angles": dict(cfg.settings.__dict__),
    }
