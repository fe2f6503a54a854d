from app.diff.tensor import Tape, Tensor, active_tape, backward
from app.diff.module import Module
from app.diff.optim import AdamState, adam_step
from app.diff.gradcheck import GradCheckReport, grad_check
from app.diff.checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "Tape",
    "Tensor",
    "active_tape",
    "backward",
    "Module",
    "AdamState",
    "adam_step",
    "GradCheckReport",
    "grad_check",
    "load_checkpoint",
    "save_checkpoint",
]
