"""Adadelta with global-norm gradient clipping."""

from __future__ import annotations

import numpy as np

from .params import ParameterSet


def global_norm(params: ParameterSet) -> float:
    total = 0.0
    for _, tensor in params.items():
        if tensor.grad is not None:
            total += float((tensor.grad.astype(np.float64) ** 2).sum())
    return float(np.sqrt(total))


def clip_global_norm(params: ParameterSet, max_norm: float = 1.0) -> float:
    """Scale all gradients so their joint norm is at most max_norm."""
    norm = global_norm(params)
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for _, tensor in params.items():
            if tensor.grad is not None:
                tensor.grad *= scale
    return norm


class Adadelta:
    """Per-parameter accumulators of squared gradients and squared updates."""

    def __init__(self, params: ParameterSet, rho: float = 0.95,
                 eps: float = 1e-6, clip_norm: float | None = 1.0):
        self.params = params
        self.rho = rho
        self.eps = eps
        self.clip_norm = clip_norm
        self.sq_grad = {name: np.zeros_like(t.value) for name, t in params.items()}
        self.sq_delta = {name: np.zeros_like(t.value) for name, t in params.items()}

    def step(self) -> None:
        """Apply one update from the gradients currently on the parameters."""
        if self.clip_norm is not None:
            clip_global_norm(self.params, self.clip_norm)
        rho, eps = self.rho, self.eps
        for name, tensor in self.params.items():
            grad = tensor.grad
            if grad is None:
                continue
            eg = self.sq_grad[name]
            ed = self.sq_delta[name]
            eg *= rho
            eg += (1.0 - rho) * grad * grad
            delta = -np.sqrt(ed + eps) / np.sqrt(eg + eps) * grad
            ed *= rho
            ed += (1.0 - rho) * delta * delta
            tensor.value += delta
        self.params.zero_grad()
