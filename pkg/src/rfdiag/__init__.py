"""RF front-end impairment simulation and multi-task fault identification."""

__version__ = "0.1.0"

from .dataset import DatasetConfig, QualityTier
from .impairments import ImpairmentParams
from .mtlmodel import MtlArchitecture
from .waveform import WaveformConfig

__all__ = [
    "__version__",
    "DatasetConfig",
    "QualityTier",
    "ImpairmentParams",
    "MtlArchitecture",
    "WaveformConfig",
]
