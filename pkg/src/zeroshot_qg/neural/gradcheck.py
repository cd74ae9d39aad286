"""Central finite-difference gradient checking used throughout the tests."""

import numpy as np


def rel_error(a, b, floor=1e-5):
    """Elementwise |a-b| / max(|a|, |b|, floor).

    The floor keeps near-zero gradients from failing on central-difference
    round-off (~|loss|*1e-16/eps), which dominates once the true gradient
    drops below ~1e-7."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def numeric_gradient(loss_fn, arr, eps=1e-5):
    """Central finite differences of ``loss_fn()`` w.r.t. ``arr`` (in place)."""
    grad = np.zeros_like(arr)
    flat = arr.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = loss_fn()
        flat[i] = orig - eps
        lo = loss_fn()
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * eps)
    return grad


def check_parameter_gradients(loss_fn, parameters, eps=1e-5, rtol=1e-4):
    """Compare stored analytic gradients against finite differences.

    ``loss_fn`` must recompute the forward loss from the current parameter
    values (no gradient side effects needed). Each parameter's ``grad``
    must already hold the analytic gradient. Returns the worst relative
    error seen; raises AssertionError past ``rtol``.
    """
    worst = 0.0
    for p in parameters:
        numeric = numeric_gradient(loss_fn, p.value, eps=eps)
        err = rel_error(p.grad, numeric)
        bad = float(err.max()) if err.size else 0.0
        worst = max(worst, bad)
        assert bad < rtol, (
            f"gradient mismatch for {p.name}: max rel err {bad:.3e} "
            f"(analytic vs central differences)"
        )
    return worst
