import json
import logging
import os
from pathlib import Path
from typing import Any, Optional, Tuple

from models.experiment import ExperimentConfig, ExperimentResult, OutputFormat, RunManifest

logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = ".manifest.json"


def format_value(value: Any) -> str:
    """CSV cell: floats with 17 significant digits, empty for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if hasattr(value, "item"):
        return format_value(value.item())
    return str(value)


def json_default(value: Any) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    if hasattr(value, "tolist"):
        return value.tolist()
    return str(value)


class OutputService:
    def __init__(self, output_dir: Optional[str] = None):
        """
        Inicializa el servicio de salida con el directorio del entorno.
        """
        self.output_dir = Path(output_dir or os.getenv("INL_OUTPUT_DIR", "results"))

    def _ensure_directory_exists(self, path: Path) -> None:
        """
        Verifica si el directorio existe, si no, lo crea.
        """
        if not path.exists():
            path.mkdir(parents=True, exist_ok=True)
            logger.info(f"Directorio '{path}' creado exitosamente")

    def data_path(self, config: ExperimentConfig) -> Path:
        if config.out_path is not None:
            return Path(config.out_path)
        return self.output_dir / f"{config.experiment.value}.{config.format.value}"

    @staticmethod
    def manifest_path(data_path: Path) -> Path:
        return data_path.with_name(data_path.stem + MANIFEST_SUFFIX)

    def render(self, config: ExperimentConfig, result: ExperimentResult, manifest_name: str) -> str:
        """
        Texto del archivo de datos. Depende solo de la configuración y del resultado.
        """
        if config.format == OutputFormat.JSON:
            payload = {"manifest": manifest_name, "summary": result.summary}
            if result.record is not None:
                payload["record"] = result.record
            else:
                payload["columns"] = result.columns
                payload["rows"] = [dict(zip(result.columns, row)) for row in result.rows]
            return json.dumps(payload, indent=2, sort_keys=True, default=json_default) + "\n"

        lines = [f"# manifest: {manifest_name}"]
        if result.record is not None:
            columns = list(result.record)
            rows = [[result.record[column] for column in columns]]
        else:
            columns, rows = result.columns, result.rows
        lines.append(",".join(columns))
        lines.extend(",".join(format_value(value) for value in row) for row in rows)
        return "\n".join(lines) + "\n"

    def write(self, config: ExperimentConfig, result: ExperimentResult, manifest: RunManifest) -> Tuple[Path, Path]:
        """
        Escribe el archivo de datos y su manifiesto.

        Returns:
            Tuple con las rutas (datos, manifiesto)
        """
        data_path = self.data_path(config)
        manifest_path = self.manifest_path(data_path)
        self._ensure_directory_exists(data_path.parent)

        with open(data_path, "w", newline="\n", encoding="utf-8") as handle:
            handle.write(self.render(config, result, manifest_path.name))
        manifest = manifest.copy(update={"data_file": data_path.name})
        with open(manifest_path, "w", newline="\n", encoding="utf-8") as handle:
            handle.write(json.dumps(manifest.dict(), indent=2, sort_keys=True, default=json_default) + "\n")

        logger.info(f"Resultados escritos en {data_path} (manifiesto {manifest_path})")
        return data_path, manifest_path
