"""Mean-field and Gaussian-fluctuation toolkit for superradiant photon currents
in a ring of lossy cavities coupled to a common emitter ensemble."""

__version__ = "0.1.0"

from .model import DetuningLadder, SystemParams, expand_ladder, ladder_params, validate  # noqa: E402
from .states import MeanFieldState, Phase, SteadySolution  # noqa: E402

__all__ = ["DetuningLadder", "SystemParams", "expand_ladder", "ladder_params", "validate",
           "MeanFieldState", "Phase", "SteadySolution", "__version__"]
