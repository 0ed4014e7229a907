"""Training loops, ADA control, EMA, checkpoints."""

from .ada import AdaState, ada_update
from .checkpoint import (
    CheckpointError,
    TrainState,
    load_checkpoint,
    read_checkpoint,
    resume_transfer,
    save_checkpoint,
)
from .loop import TrainAbort, TrainConfig, ema_update, run_training, train_step

__all__ = [
    "AdaState",
    "ada_update",
    "CheckpointError",
    "TrainState",
    "load_checkpoint",
    "read_checkpoint",
    "resume_transfer",
    "save_checkpoint",
    "TrainAbort",
    "TrainConfig",
    "ema_update",
    "run_training",
    "train_step",
]
