"""Central finite-difference gradient verification.

Only ever calls the forward computation, so it stays independent of every
backward rule it is used to check.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor, backward, zero_grads


def numeric_gradient(f: Callable[[], Tensor], param: Tensor, eps: float = 1e-5) -> np.ndarray:
    """d f / d param estimated with central differences, elementwise."""
    grad = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        up = f().item()
        flat[i] = orig - eps
        down = f().item()
        flat[i] = orig
        gflat[i] = (up - down) / (2.0 * eps)
    return grad


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    """Max elementwise |a-b| / max(|a|, |b|, 1)."""
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1.0)
    return float(np.max(np.abs(a - b) / denom))


def check_gradients(
    f: Callable[[], Tensor],
    params: Sequence[Tensor],
    eps: float = 1e-5,
    tol: float = 1e-4,
) -> float:
    """Compare analytic gradients of f() against finite differences.

    Returns the worst relative error over all parameters; raises
    AssertionError with the offending parameter when above tol.
    """
    zero_grads(params)
    loss = f()
    backward(loss)
    analytic = [None if p.grad is None else p.grad.copy() for p in params]
    worst = 0.0
    for p, ana in zip(params, analytic):
        num = numeric_gradient(f, p, eps=eps)
        if ana is None:
            ana = np.zeros_like(num)
        err = relative_error(ana, num)
        worst = max(worst, err)
        if err > tol:
            name = getattr(p, "name", "<tensor>")
            raise AssertionError(
                f"gradient mismatch on {name}: relative error {err:.3e} > {tol:.1e}"
            )
    zero_grads(params)
    return worst
