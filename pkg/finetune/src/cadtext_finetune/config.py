"""Training and sampling configuration.

Full-protocol defaults: adapter rank 8 / alpha 32, cosine schedule at
5e-4, batch 32, 30 epochs, sampling at temperature 1.1 / top-p 0.9.
`TrainConfig.tiny()` is the documented CPU smoke schedule used by the
end-to-end test.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass
class ModelConfig:
    d_model: int = 192
    n_layers: int = 4
    n_heads: int = 4
    d_ff: int = 512
    max_len: int = 384
    dropout: float = 0.0


@dataclass
class TrainConfig:
    backend: str = "small-from-scratch"  # or "adapter-finetune"
    lora_rank: int = 8
    lora_alpha: int = 32
    learning_rate: float = 5e-4
    batch_size: int = 32
    epochs: int = 30
    seed: int = 0
    model: ModelConfig = None

    def __post_init__(self):
        if self.model is None:
            self.model = ModelConfig()
        if self.backend not in ("small-from-scratch", "adapter-finetune"):
            raise ValueError(f"unknown backend {self.backend!r}")

    @classmethod
    def tiny(cls, **overrides) -> "TrainConfig":
        """Documented smoke schedule: a few CPU minutes on ~1k examples."""
        defaults = dict(
            backend="small-from-scratch",
            learning_rate=5e-4,
            batch_size=32,
            epochs=12,
            seed=0,
            model=ModelConfig(d_model=160, n_layers=3, n_heads=4, d_ff=448, max_len=256),
        )
        defaults.update(overrides)
        return cls(**defaults)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SamplingConfig:
    temperature: float = 1.1
    top_p: float = 0.9
    max_new_tokens: int = 160
    num_samples: int = 10
    seed: int = 0

    def as_dict(self) -> dict:
        return asdict(self)
