"""
Experiment configuration: model defaults < INL_* environment variables <
KEY=VALUE config file < command-line flags.
"""
import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from dotenv import dotenv_values
from pydantic import ValidationError

from models.experiment import ExperimentConfig
from services.exceptions import ConfigError

logger = logging.getLogger(__name__)

ENV_PREFIX = "INL_"
TOLERANCE_PREFIX = "TOL_"
# keys accepted under another name in files and environment
ALIASES = {"out": "out_path", "output": "out_path", "output_dir": None}


def _field_names():
    return set(ExperimentConfig.__fields__) - {"experiment", "tolerances"}


def _read_pairs(pairs: Mapping[str, Optional[str]], source: str, strict: bool) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    tolerances: Dict[str, float] = {}
    fields = _field_names()
    for raw_key, raw_value in pairs.items():
        if raw_value is None or raw_value == "":
            continue
        key = raw_key.strip().lower()
        if key.upper().startswith(TOLERANCE_PREFIX):
            name = key[len(TOLERANCE_PREFIX):]
            try:
                tolerances[name] = float(raw_value)
            except ValueError:
                raise ConfigError(f"{source}: tolerance {raw_key} is not a number: {raw_value!r}")
            continue
        key = key.replace("-", "_")
        if key in ALIASES:
            key = ALIASES[key]
            if key is None:
                continue
        if key not in fields:
            if strict:
                raise ConfigError(f"{source}: unknown key {raw_key}")
            continue
        values[key] = raw_value
    if tolerances:
        values["tolerances"] = tolerances
    return values


def from_environment(environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    environ = os.environ if environ is None else environ
    pairs = {}
    for key, value in environ.items():
        if key.startswith(ENV_PREFIX):
            pairs[key[len(ENV_PREFIX):]] = value
        elif key.startswith(TOLERANCE_PREFIX):
            pairs[key] = value
    return _read_pairs(pairs, "environment", strict=False)


def from_file(path: Path) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return _read_pairs(dotenv_values(path), str(path), strict=True)


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if key == "tolerances":
            merged["tolerances"] = {**merged.get("tolerances", {}), **value}
        else:
            merged[key] = value
    return merged


def load_config(
    experiment: str,
    config_path: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> ExperimentConfig:
    """
    Construye la configuración del experimento combinando todas las fuentes.

    Args:
        experiment: Nombre del experimento (born, collapse-time, ...)
        config_path: Archivo KEY=VALUE opcional
        overrides: Valores de la línea de comandos (los None se ignoran)
        environ: Entorno a usar en lugar de os.environ

    Returns:
        ExperimentConfig validado

    Raises:
        ConfigError: si algún valor falta o no es válido
    """
    values = from_environment(environ)
    if config_path is not None:
        values = _merge(values, from_file(config_path))
    if overrides:
        values = _merge(values, {k: v for k, v in overrides.items() if v is not None})
    values["experiment"] = experiment
    try:
        config = ExperimentConfig(**values)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration for {experiment}: {exc}")
    logger.debug(f"Configuration for {experiment}: {config.echo()}")
    return config
