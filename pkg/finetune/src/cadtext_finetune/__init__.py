"""Fine-tuning and sampling harness for structured CAD text corpora."""

from .config import ModelConfig, SamplingConfig, TrainConfig
from .train import load_checkpoint, train
from .sample import generate, sample_checkpoint, sample_file
from .vocab import Vocab

__version__ = "0.1.0"

__all__ = [
    "ModelConfig",
    "SamplingConfig",
    "TrainConfig",
    "Vocab",
    "generate",
    "load_checkpoint",
    "sample_checkpoint",
    "sample_file",
    "train",
    "__version__",
]
