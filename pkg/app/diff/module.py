"""Parameter containers with named, recursive parameter access."""
import hashlib
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from app.core.exceptions import ModelError
from app.diff.tensor import Tensor


class Module:
    """Base class for anything holding trainable tensors.

    Parameters are ``Tensor`` attributes created through ``param``; child
    modules are any ``Module`` attributes or lists of modules. Names are
    dotted paths in attribute-definition order, so they are stable across
    processes.
    """

    def param(self, name: str, data: np.ndarray) -> Tensor:
        t = Tensor(np.array(data, dtype=np.float64), requires_grad=True, name=name)
        setattr(self, name, t)
        return t

    def _children(self) -> Iterator[Tuple[str, "Module"]]:
        for key, value in vars(self).items():
            if isinstance(value, Module):
                yield key, value
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield f"{key}.{i}", item

    def named_parameters(self, prefix: str = "") -> List[Tuple[str, Tensor]]:
        out: List[Tuple[str, Tensor]] = []
        for key, value in vars(self).items():
            if isinstance(value, Tensor) and value.name is not None:
                out.append((prefix + key, value))
        for key, child in self._children():
            out.extend(child.named_parameters(prefix=f"{prefix}{key}."))
        return out

    def parameters(self) -> List[Tensor]:
        return [t for _, t in self.named_parameters()]

    def trainable(self) -> List[Tuple[str, Tensor]]:
        return [(name, t) for name, t in self.named_parameters() if t.requires_grad]

    def freeze(self) -> None:
        for t in self.parameters():
            t.requires_grad = False

    def unfreeze(self) -> None:
        for t in self.parameters():
            t.requires_grad = True

    def zero_grad(self) -> None:
        for t in self.parameters():
            t.grad = None

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.named_parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray], strict: bool = True) -> None:
        """Copy values into the existing parameters.

        Raises:
            ModelError: On missing or unexpected names or shape mismatches.
        """
        params = dict(self.named_parameters())
        if strict:
            missing = sorted(set(params) - set(state))
            unexpected = sorted(set(state) - set(params))
            if missing or unexpected:
                raise ModelError(f"state mismatch: missing={missing} unexpected={unexpected}")
        for name, value in state.items():
            target = params.get(name)
            if target is None:
                continue
            value = np.asarray(value, dtype=np.float64)
            if value.shape != target.shape:
                raise ModelError(f"shape mismatch for {name}: {value.shape} vs {target.shape}")
            target.data = value.copy()

    def parameter_hash(self, prefixes: Optional[Tuple[str, ...]] = None) -> str:
        """sha256 over names, shapes and raw values (optionally only names under ``prefixes``)."""
        digest = hashlib.sha256()
        for name, t in self.named_parameters():
            if prefixes is not None and not name.startswith(prefixes):
                continue
            digest.update(name.encode())
            digest.update(str(t.shape).encode())
            digest.update(np.ascontiguousarray(t.data, dtype="<f8").tobytes())
        return digest.hexdigest()

    def parameter_count(self) -> int:
        return int(sum(t.size for t in self.parameters()))
