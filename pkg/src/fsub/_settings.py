"""
This module provides the packaged configuration for fsub.
"""

import importlib.resources
import json
from copy import deepcopy
from typing import Literal

_REQUIRED = (
    "fuel",
    "trials",
    "seed",
    "max_type_size",
    "max_env_len",
    "oracle_depth_limit",
    "debug",
    "generator",
)


class Settings:
    """
    Configuration for checking, transforming and fuzzing.

    Attributes
    ----------
    config : dict
        The raw configuration.
    fuel : int
        Default fuel for decision procedures.
    trials : int
        Default trial count for harness runs.
    seed : int
        Default 64-bit seed for harness runs.
    max_type_size : int
        Default node budget for generated types.
    max_env_len : int
        Default number of bindings for generated environments.
    oracle_depth_limit : int
        Largest derivation height the enumeration oracle accepts.
    debug : bool
        Whether transformers validate inputs and re-validate outputs.
    generator : dict[str, float]
        Node-kind weights for the type generator (leaf, arrow, forall).
    """

    def __init__(self, config: str | dict):
        """
        Initialize the Settings class.

        Parameters
        ----------
        config : str | dict
            The path to the configuration file or a dictionary containing the configuration data.

        Raises
        ------
        ValueError
            If the configuration data is invalid.
        """
        if isinstance(config, str):
            # config is a file path
            with open(config) as config_file:
                self.config = json.load(config_file)
        elif isinstance(config, dict):
            # config is a dictionary
            self.config = deepcopy(config)
        else:
            raise ValueError(
                "Invalid configuration data. Must be a file path or dictionary."
            )

        missing = [key for key in _REQUIRED if key not in self.config]
        if missing:
            raise ValueError(f"Configuration is missing keys: {missing}")

        self.fuel = int(self.config["fuel"])
        self.trials = int(self.config["trials"])
        self.seed = int(self.config["seed"])
        self.max_type_size = int(self.config["max_type_size"])
        self.max_env_len = int(self.config["max_env_len"])
        self.oracle_depth_limit = int(self.config["oracle_depth_limit"])
        self.debug = bool(self.config["debug"])
        self.generator = {k: float(v) for k, v in self.config["generator"].items()}

        if self.fuel < 1 or self.trials < 1 or self.max_type_size < 1:
            raise ValueError("fuel, trials and max_type_size must be positive.")
        if set(self.generator) != {"leaf", "arrow", "forall"}:
            raise ValueError("generator weights must name leaf, arrow and forall.")
        if abs(sum(self.generator.values()) - 1.0) > 1e-9:
            raise ValueError("generator weights must sum to 1.")

    def __repr__(self) -> str:
        config = json.dumps(self.config, indent=4)
        return f"Settings(config={config})"

    def __str__(self) -> Literal["fsub Settings"]:
        return "fsub Settings"


config = json.loads(
    importlib.resources.files("fsub").joinpath("config.json").read_text()
)
settings = Settings(config)
