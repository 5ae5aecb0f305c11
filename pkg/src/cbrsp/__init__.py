"""Simulation of controlled bidirectional remote state preparation under noise."""
from .channels import (CAO_AN, NOISE_STUDY, Bell, FiveQubitChannelSpec, GhzKind,
                       SevenQubitChannelSpec, make_five_qubit_channel, make_seven_qubit_channel)
from .protocols import (EnumerateAll, Forced, Sampled, TargetState, run_cjbrsp,
                        run_deterministic_cbrsp, run_probabilistic_cbrsp)

__version__ = "0.1.0"

__all__ = [
    "CAO_AN", "NOISE_STUDY", "Bell", "FiveQubitChannelSpec", "GhzKind", "SevenQubitChannelSpec",
    "make_five_qubit_channel", "make_seven_qubit_channel", "EnumerateAll", "Forced", "Sampled",
    "TargetState", "run_cjbrsp", "run_deterministic_cbrsp", "run_probabilistic_cbrsp",
]
