"""Cycle-consistent adversarial translator with an embedding channel."""

from .losses import (
    adversarial_loss,
    cycle_loss,
    embedding_loss,
    identity_loss,
    lsgan_adversarial_loss,
    total_objective,
    with_zero_embedding,
)
from .networks import Discriminator, DiscriminatorConfig, Generator, GeneratorConfig
from .training import (
    EmbBatch,
    GanConfig,
    GanState,
    GanTrainingError,
    load_checkpoint,
    save_checkpoint,
    train,
    train_step,
    translate,
)

__all__ = [
    "Discriminator",
    "DiscriminatorConfig",
    "EmbBatch",
    "GanConfig",
    "GanState",
    "GanTrainingError",
    "Generator",
    "GeneratorConfig",
    "adversarial_loss",
    "cycle_loss",
    "embedding_loss",
    "identity_loss",
    "load_checkpoint",
    "lsgan_adversarial_loss",
    "save_checkpoint",
    "total_objective",
    "train",
    "train_step",
    "translate",
    "with_zero_embedding",
]
