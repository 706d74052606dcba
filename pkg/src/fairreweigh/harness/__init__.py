from .experiment import (
    ConfigError,
    ExperimentConfig,
    ExperimentResult,
    Treatment,
    configs_from_dict,
    load_configs,
    run_experiment,
)
from .fidelity import density_fidelity

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "Treatment",
    "configs_from_dict",
    "density_fidelity",
    "load_configs",
    "run_experiment",
]
