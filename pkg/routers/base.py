from typing import Callable, Dict, List, Optional

from models.experiment import ExperimentConfig, ExperimentName, ExperimentResult

Handler = Callable[[ExperimentConfig], ExperimentResult]


class ExperimentRouter:
    """
    Groups experiment handlers the way an API router groups endpoints;
    the experiment service includes routers and dispatches by experiment name.
    """
    def __init__(self, tags: Optional[List[str]] = None):
        self.tags = tags or []
        self.routes: Dict[ExperimentName, Handler] = {}

    def experiment(self, name: ExperimentName) -> Callable[[Handler], Handler]:
        def register(handler: Handler) -> Handler:
            if name in self.routes:
                raise ValueError(f"experiment {name.value} registered twice")
            self.routes[name] = handler
            return handler
        return register
