"""
Configuration settings for parrep-sensitivity.

This module contains numerical tolerances, engine knobs and the per-model
defaults used throughout the application.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple


@dataclass
class Settings:
    """
    Configuration settings for the simulation engines.

    These settings control tolerances of the numerical oracles, the RNG
    buffering of the simulation kernel and the defaults of the built-in
    models.
    """

    # Random streams
    RNG_BLOCK_SIZE: int = 4096

    # Simulation kernel: jump log rows per compiled call
    KERNEL_LOG_SIZE: int = 1 << 16

    # Parallel phase: lockstep rounds between worker synchronizations
    PARALLEL_BLOCK_ROUNDS: int = 512

    # Statistics
    CONFIDENCE_Z: float = 1.96
    CONFIDENCE_LEVEL: float = 0.95

    # Numerical tolerances
    CME_RESIDUAL_TOL: float = 1e-10
    BOUNDARY_MASS_TOL: float = 1e-12
    PSD_TOL: float = 1e-10
    MAX_BOX_STATES: int = 1_000_000

    # ParRep defaults
    DECORRELATION_THRESHOLD: int = 5000
    DEPHASING_THRESHOLD: int = 5000
    REPLICAS: int = 100

    # Sensitivity defaults
    BURN_IN: float = 1.0e5
    WINDOW: float = 1.0e5

    # Model defaults
    SEPARATRIX_SPECIES: int = 0
    SEPARATRIX: float = 25.9649
    INITIAL_STATE: Optional[List[int]] = None
    CME_BOX: Optional[List[Tuple[int, int]]] = None

    def __post_init__(self) -> None:
        """Initialize default values."""
        if self.INITIAL_STATE is None:
            self.INITIAL_STATE = [0]

        if self.CME_BOX is None:
            self.CME_BOX = [(0, 149)]

    @classmethod
    def default(cls) -> "Settings":
        """
        Create settings with default values.

        Returns:
            Settings object with default configuration
        """
        return cls()

    @classmethod
    def for_schlogl(cls) -> "Settings":
        """
        Create settings for the bistable Schlogl network.

        Returns:
            Settings object with the converged thresholds and windows
        """
        return cls()

    @classmethod
    def for_genetic_switch(cls) -> "Settings":
        """
        Create settings for the genetic switch network.

        Returns:
            Settings object with the genetic switch thresholds and windows
        """
        settings = cls()
        settings.DECORRELATION_THRESHOLD = 20_000
        settings.DEPHASING_THRESHOLD = 20_000
        settings.BURN_IN = 1.0e6
        settings.WINDOW = 1.0e6
        # protein coordinate through the saddle point
        settings.SEPARATRIX_SPECIES = 3
        settings.SEPARATRIX = 511.2865
        settings.INITIAL_STATE = [0, 1, 0, 0]
        settings.CME_BOX = None
        return settings

    @classmethod
    def for_model(cls, name: str) -> "Settings":
        """
        Look up the settings of a built-in model by name.

        Args:
            name: Built-in model name

        Returns:
            Settings for the model, or the defaults for unknown names
        """
        factories = {
            "schlogl": cls.for_schlogl,
            "genetic_switch": cls.for_genetic_switch,
        }
        return factories.get(name, cls.default)()

    def to_dict(self) -> Dict[str, Any]:
        """
        Convert settings to dictionary.

        Returns:
            Dictionary representation of settings
        """
        return {
            "rng_block_size": self.RNG_BLOCK_SIZE,
            "kernel_log_size": self.KERNEL_LOG_SIZE,
            "parallel_block_rounds": self.PARALLEL_BLOCK_ROUNDS,
            "confidence_z": self.CONFIDENCE_Z,
            "confidence_level": self.CONFIDENCE_LEVEL,
            "cme_residual_tol": self.CME_RESIDUAL_TOL,
            "boundary_mass_tol": self.BOUNDARY_MASS_TOL,
            "psd_tol": self.PSD_TOL,
            "max_box_states": self.MAX_BOX_STATES,
            "decorrelation_threshold": self.DECORRELATION_THRESHOLD,
            "dephasing_threshold": self.DEPHASING_THRESHOLD,
            "replicas": self.REPLICAS,
            "burn_in": self.BURN_IN,
            "window": self.WINDOW,
            "separatrix_species": self.SEPARATRIX_SPECIES,
            "separatrix": self.SEPARATRIX,
            "initial_state": self.INITIAL_STATE,
            "cme_box": self.CME_BOX,
        }


# Global default settings instance
DEFAULT_SETTINGS = Settings.default()
