from app.pipeline.dataset import cmd_gen, load_dataset
from app.pipeline.training import cmd_train_step1, cmd_train_step2
from app.pipeline.evaluation import cmd_eval, cmd_transfer
from app.pipeline.spectral_compare import cmd_spectral_compare

__all__ = [
    "cmd_gen",
    "load_dataset",
    "cmd_train_step1",
    "cmd_train_step2",
    "cmd_eval",
    "cmd_transfer",
    "cmd_spectral_compare",
]
