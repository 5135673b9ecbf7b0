import logging
import time
from pathlib import Path
from typing import Dict, Optional, Tuple

from models.experiment import ExperimentConfig, ExperimentName, ExperimentResult, RunManifest
from routers.base import ExperimentRouter, Handler
from services.exceptions import ConfigError, INLError
from services.output_service import OutputService

logger = logging.getLogger(__name__)


class ExperimentService:
    """
    Runs experiments: dispatches a config to its handler and writes data plus manifest.
    """
    def __init__(self, version: str, output: Optional[OutputService] = None):
        self.version = version
        self.output = output or OutputService()
        self.routes: Dict[ExperimentName, Handler] = {}

    def include_router(self, router: ExperimentRouter) -> None:
        for name, handler in router.routes.items():
            if name in self.routes:
                raise ValueError(f"experiment {name.value} is already routed")
            self.routes[name] = handler

    def execute(self, config: ExperimentConfig) -> ExperimentResult:
        """Run the handler only, without writing files."""
        handler = self.routes.get(config.experiment)
        if handler is None:
            raise ConfigError(f"no handler for experiment {config.experiment.value}")
        logger.info(f"Starting experiment {config.experiment.value}")
        try:
            return handler(config)
        except INLError as e:
            logger.error(f"Experiment {config.experiment.value} failed: {e}")
            raise

    def run(self, config: ExperimentConfig) -> Tuple[RunManifest, Path]:
        """
        Ejecuta el experimento y escribe los archivos de salida.

        Returns:
            Tuple con el manifiesto y la ruta del archivo de datos
        """
        start = time.perf_counter()
        result = self.execute(config)
        manifest = RunManifest(
            config=config.echo(),
            version=self.version,
            wall_clock_seconds=time.perf_counter() - start,
            summary=result.summary,
            status="ok" if result.passed else "failed-check",
        )
        data_path, _ = self.output.write(config, result, manifest)
        logger.info(f"Experiment {config.experiment.value} finished in {manifest.wall_clock_seconds:.3f} s")
        return manifest.copy(update={"data_file": data_path.name}), data_path
