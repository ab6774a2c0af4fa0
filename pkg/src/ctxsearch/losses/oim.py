"""Online instance matching loss with a lookup table and circular queue.

The lookup table keeps one slot per labeled identity; the circular
queue keeps recent unlabeled-person features as extra negatives.
Classification logits are inner products against both banks over a
temperature.  Table rows that have never been written are masked out of
the softmax, except for rows being learned in the current batch (a
first-seen identity must be able to receive gradient toward its own
slot).

Bank updates are a separate op from the loss so the memory keeps
tracking features even when the loss weight is zero.
"""

from __future__ import annotations

import torch

from ctxsearch.data.types import UNLABELED
from ctxsearch.errors import ConfigurationError

_EPS = 1e-12


class OimState:
    def __init__(
        self,
        num_identities: int,
        dim: int,
        queue_size: int,
        temperature: float = 1.0 / 30.0,
        momentum: float = 0.5,
    ):
        if num_identities <= 0:
            raise ConfigurationError(f"num_identities must be positive, got {num_identities}")
        if dim <= 0:
            raise ConfigurationError(f"dim must be positive, got {dim}")
        if queue_size < 0:
            raise ConfigurationError(f"queue_size must be >= 0, got {queue_size}")
        if temperature <= 0:
            raise ConfigurationError(f"temperature must be positive, got {temperature}")
        if not 0.0 <= momentum <= 1.0:
            raise ConfigurationError(f"momentum must be in [0, 1], got {momentum}")
        self.num_identities = num_identities
        self.dim = dim
        self.queue_size = queue_size
        self.temperature = float(temperature)
        self.momentum = float(momentum)
        self.lut = torch.zeros(num_identities, dim)
        self.queue = torch.zeros(queue_size, dim)
        self.lut_filled = torch.zeros(num_identities, dtype=torch.bool)
        self.queue_filled = torch.zeros(queue_size, dtype=torch.bool)
        self.pointer = 0

    def state_dict(self) -> dict:
        return {
            "num_identities": self.num_identities,
            "dim": self.dim,
            "queue_size": self.queue_size,
            "temperature": self.temperature,
            "momentum": self.momentum,
            "lut": self.lut.clone(),
            "queue": self.queue.clone(),
            "lut_filled": self.lut_filled.clone(),
            "queue_filled": self.queue_filled.clone(),
            "pointer": self.pointer,
        }

    def load_state_dict(self, state: dict) -> None:
        for key in ("num_identities", "dim", "queue_size"):
            if state[key] != getattr(self, key):
                raise ConfigurationError(
                    f"checkpointed {key}={state[key]} does not match state {getattr(self, key)}"
                )
        self.temperature = float(state["temperature"])
        self.momentum = float(state["momentum"])
        self.lut = state["lut"].clone()
        self.queue = state["queue"].clone()
        self.lut_filled = state["lut_filled"].clone()
        self.queue_filled = state["queue_filled"].clone()
        self.pointer = int(state["pointer"])


def _as_batch(x: torch.Tensor, labels) -> tuple[torch.Tensor, torch.Tensor]:
    if x.dim() == 1:
        x = x.unsqueeze(0)
    if x.dim() != 2:
        raise ValueError(f"expected [N, d] or [d] features, got shape {tuple(x.shape)}")
    labels = torch.as_tensor(labels, dtype=torch.long).reshape(-1)
    if labels.shape[0] != x.shape[0]:
        raise ValueError(f"{x.shape[0]} features but {labels.shape[0]} labels")
    return x, labels


def _check_labels(labels: torch.Tensor, num_identities: int) -> None:
    if labels.numel() and int(labels.max()) >= num_identities:
        raise ConfigurationError(
            f"label {int(labels.max())} out of range for table of size {num_identities}"
        )
    if labels.numel() and int(labels.min()) < UNLABELED:
        raise ConfigurationError(f"labels below {UNLABELED} are not valid")


def oim_loss(x: torch.Tensor, labels, state: OimState) -> torch.Tensor:
    """Differentiable scalar loss over the labeled rows of x.

    Unlabeled rows (label -1) contribute no loss terms here; they only
    matter as queue negatives after oim_update.  Returns a zero that is
    still connected to x when no row is labeled.
    """
    x, labels = _as_batch(x, labels)
    if x.shape[1] != state.dim:
        raise ValueError(f"feature dim {x.shape[1]} does not match bank dim {state.dim}")
    _check_labels(labels, state.num_identities)

    labeled = labels >= 0
    if not bool(labeled.any()):
        return x.sum() * 0.0

    bank = torch.cat([state.lut, state.queue], dim=0).to(x.dtype)
    logits = x @ bank.t() / state.temperature

    valid_lut = state.lut_filled.clone()
    valid_lut[labels[labeled]] = True
    valid = torch.cat([valid_lut, state.queue_filled])
    logits = logits.masked_fill(~valid.unsqueeze(0), float("-inf"))

    log_probs = torch.log_softmax(logits[labeled], dim=1)
    picked = log_probs.gather(1, labels[labeled].unsqueeze(1)).squeeze(1)
    return -picked.mean()


def oim_forward(x: torch.Tensor, labels, state: OimState) -> tuple[float, torch.Tensor]:
    """Convenience wrapper returning (loss value, gradient w.r.t. x)."""
    x = x.detach().clone().requires_grad_(True)
    loss = oim_loss(x, labels, state)
    grad = torch.autograd.grad(loss, x, allow_unused=False)[0]
    return float(loss.detach()), grad.detach()


@torch.no_grad()
def oim_update(state: OimState, x: torch.Tensor, labels) -> OimState:
    """Write a batch of features into the banks (in place).

    Labeled rows: the first write to an identity's slot stores the
    feature as-is; later writes blend momentum * old + (1 - momentum) *
    new and renormalize to unit length.  Unlabeled rows go into the
    circular queue at the write pointer.
    """
    x, labels = _as_batch(x, labels)
    if x.shape[1] != state.dim:
        raise ValueError(f"feature dim {x.shape[1]} does not match bank dim {state.dim}")
    _check_labels(labels, state.num_identities)

    x = x.detach().to(state.lut.dtype)
    for row, label in zip(x, labels.tolist()):
        if label >= 0:
            if state.lut_filled[label]:
                blended = state.momentum * state.lut[label] + (1.0 - state.momentum) * row
                state.lut[label] = blended / blended.norm().clamp(min=_EPS)
            else:
                state.lut[label] = row
                state.lut_filled[label] = True
        elif state.queue_size > 0:
            state.queue[state.pointer] = row
            state.queue_filled[state.pointer] = True
            state.pointer = (state.pointer + 1) % state.queue_size
    return state
