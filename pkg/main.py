import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

from models.experiment import ExperimentName
from routers import born, collapse_time, competition, highdim, kaon, props
from services.config_service import load_config
from services.exceptions import ConfigError, INLError
from services.experiment_service import ExperimentService
from services.output_service import json_default
from services.service_provider import get_output_service

# Cargar variables de entorno desde el archivo .env
load_dotenv()

# Configurar logging
log_level = os.getenv("LOG_LEVEL", "INFO")
logging.basicConfig(
    level=getattr(logging, log_level),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

VERSION = "1.0.0"

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def create_service() -> ExperimentService:
    service = ExperimentService(version=VERSION, output=get_output_service())

    # Incluir routers
    service.include_router(born.router)
    service.include_router(collapse_time.router)
    service.include_router(competition.router)
    service.include_router(kaon.router)
    service.include_router(highdim.router)
    service.include_router(props.router)
    return service


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inl",
        description="Simulaciones de colapso estocástico para estados bipartitos",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument("experiment", choices=[name.value for name in ExperimentName])
    parser.add_argument("--config", help="archivo KEY=VALUE con la configuración")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--eta", help="eta, o lista separada por comas para competition")
    parser.add_argument("--gamma", help="acoplamiento complejo, p. ej. 1 o 3.5e-6+3.5e-6i")
    parser.add_argument("--n", type=int)
    parser.add_argument("--m", type=int)
    parser.add_argument("--trajectories", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--dt", type=float)
    parser.add_argument("--theta0", type=float)
    parser.add_argument("--phi0", type=float)
    parser.add_argument("--tmax", type=float)
    parser.add_argument("--tau-kl", dest="tau_kl", type=float, help="vida media del K_L en segundos (kaon)")
    parser.add_argument("--branching", type=float, help="fracción semileptónica (kaon)")
    parser.add_argument("--noise", action="store_true", default=None, help="ruido en competition")
    parser.add_argument("--out", help="ruta del archivo de datos")
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--threads", type=int)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    overrides = {
        key: getattr(args, key)
        for key in ("alpha", "gamma", "n", "m", "trajectories", "seed", "dt",
                    "theta0", "phi0", "tmax", "tau_kl", "branching", "noise", "format", "threads")
    }
    overrides["out_path"] = args.out
    if args.eta is not None:
        if "," in args.eta:
            overrides["etas"] = args.eta
        else:
            overrides["eta"] = args.eta
    return overrides


def _report_error(code: int, experiment: str, error: Exception) -> int:
    record = {"status": "error", "code": code, "experiment": experiment, "message": str(error)}
    print(json.dumps(record), file=sys.stderr)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.experiment, args.config, _overrides(args))
        manifest, data_path = create_service().run(config)
    except ConfigError as e:
        logger.error(f"Configuración inválida: {e}")
        return _report_error(EXIT_CONFIG, args.experiment, e)
    except INLError as e:
        logger.error(f"Error numérico en {args.experiment}: {e}")
        return _report_error(EXIT_NUMERICAL, args.experiment, e)
    except OSError as e:
        logger.error(f"Error de E/S: {e}")
        return _report_error(EXIT_IO, args.experiment, e)
    except ValueError as e:
        logger.error(f"Parámetros inválidos: {e}")
        return _report_error(EXIT_CONFIG, args.experiment, e)

    print(json.dumps({"status": manifest.status, "data_file": str(data_path), "summary": manifest.summary},
                     sort_keys=True, default=json_default))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
