"""Classical fourth-order Runge-Kutta with a fixed step.

Shared by the epidemic and game integrators so both use the same scheme.
The right-hand side works on whole numpy arrays, which lets callers integrate
a batch of independent systems in one sweep.
"""
import numpy as np


def rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def n_steps(horizon: float, step: float) -> int:
    """Number of fixed steps covering ``horizon``; it must be a multiple of ``step``."""
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    if horizon < step:
        raise ValueError(f"horizon ({horizon}) must be >= step ({step})")
    n = int(round(horizon / step))
    if abs(n * step - horizon) > 1e-9 * max(1.0, horizon):
        raise ValueError(f"horizon {horizon} is not a whole number of steps of {step}")
    return n


def integrate(f, y0, step, steps, callback=None):
    """Advance ``y0`` by ``steps`` RK4 steps and return the full path.

    ``callback(j, y)`` runs after every step and may raise to abort.
    """
    y = np.array(y0, dtype=float)
    path = np.empty((steps + 1,) + y.shape)
    path[0] = y
    for j in range(1, steps + 1):
        y = rk4_step(f, y, step)
        if callback is not None:
            callback(j, y)
        path[j] = y
    return path
