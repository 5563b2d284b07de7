"""Analytic-versus-numeric gradient comparison."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ParameterSet


@dataclass
class GradCheckReport:
    max_relative_error: float
    per_parameter: dict
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_relative_error < self.tolerance

    def to_json(self) -> dict:
        return {"maxRelativeError": self.max_relative_error,
                "tolerance": self.tolerance, "passed": self.passed,
                "perParameter": dict(self.per_parameter)}


def gradient_check(loss_fn, params: ParameterSet, tolerance: float = 1e-4,
                   step: float = 1e-5) -> GradCheckReport:
    """Compare tape gradients against central finite differences.

    `loss_fn()` must rebuild the scalar loss from the current parameter
    values each call.  Run under float64_mode with 64-bit parameters;
    32-bit arithmetic has too little headroom for the difference quotient.
    """
    params.zero_grad()
    loss = loss_fn()
    if not np.isfinite(loss.value).all():
        raise FloatingPointError("non-finite loss in gradient check")
    loss.backward()
    analytic = {name: (np.zeros_like(t.value) if t.grad is None
                       else t.grad.copy())
                for name, t in params.items()}

    per_parameter = {}
    worst = 0.0
    for name, tensor in params.items():
        value = tensor.value
        grad_flat = analytic[name].reshape(-1)
        err = 0.0
        for i in range(value.size):
            original = value.flat[i]
            value.flat[i] = original + step
            up = float(loss_fn().value)
            value.flat[i] = original - step
            down = float(loss_fn().value)
            value.flat[i] = original
            numeric = (up - down) / (2.0 * step)
            a = float(grad_flat[i])
            denom = max(abs(a), abs(numeric), 1e-8)
            gap = abs(a - numeric) / denom
            if abs(a - numeric) < 1e-9:
                gap = 0.0
            err = max(err, gap)
        per_parameter[name] = err
        worst = max(worst, err)
    return GradCheckReport(max_relative_error=worst,
                           per_parameter=per_parameter, tolerance=tolerance)
