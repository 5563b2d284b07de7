"""Mini-batch training loop with early stopping, shared by the models."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nn import Adadelta, ParameterSet


@dataclass
class TrainingHistory:
    epoch_losses: list = field(default_factory=list)
    monitor_losses: list = field(default_factory=list)
    best_epoch: int = 0
    stopped_epoch: int = 0

    def to_json(self) -> dict:
        return {"epochLosses": [round(v, 6) for v in self.epoch_losses],
                "monitorLosses": [round(v, 6) for v in self.monitor_losses],
                "bestEpoch": self.best_epoch, "stoppedEpoch": self.stopped_epoch}


def train_loop(params: ParameterSet, instances, loss_fn, *, dev=None,
               epochs: int = 40, patience: int = 10, batch_size: int = 80,
               seed: int = 0, clip_norm: float = 1.0) -> TrainingHistory:
    """Adadelta training over per-instance losses.

    `loss_fn(instance, rng)` must return a scalar tape loss; `rng` is None
    for held-out evaluation (dropout off).  Early stopping watches dev loss
    when `dev` is given, training loss otherwise, restoring the best
    parameters on exit.
    """
    if not instances:
        raise ValueError("empty training set")
    rng = np.random.default_rng(seed)
    optimizer = Adadelta(params, clip_norm=clip_norm)
    history = TrainingHistory()
    best_loss = np.inf
    best_values = None
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(instances))
        running = 0.0
        for start in range(0, len(order), batch_size):
            batch = order[start:start + batch_size]
            params.zero_grad()
            total = None
            for index in batch:
                loss = loss_fn(instances[index], rng)
                total = loss if total is None else total + loss
            batch_loss = total * (1.0 / len(batch))
            batch_loss.backward()
            optimizer.step()
            running += float(batch_loss.value) * len(batch)
        epoch_loss = running / len(instances)
        history.epoch_losses.append(epoch_loss)
        if dev is not None:
            monitor = float(np.mean([float(loss_fn(inst, None).value)
                                     for inst in dev]))
        else:
            monitor = epoch_loss
        history.monitor_losses.append(monitor)
        if monitor < best_loss:
            best_loss = monitor
            best_values = {name: t.value.copy() for name, t in params.items()}
            history.best_epoch = epoch
        elif epoch - history.best_epoch >= patience:
            break
    history.stopped_epoch = len(history.epoch_losses)
    if best_values is not None:
        for name, tensor in params.items():
            tensor.value[...] = best_values[name]
    return history
