import numpy as np


def error_pct(y_true, y_pred):
    """Absolute percentage error ``100 * |y_true - y_pred| / y_true``.

    Works elementwise on arrays; returns a float for scalar input.
    """
    out = 100.0 * np.abs(np.asarray(y_true, dtype=np.float64) - y_pred) / np.asarray(y_true, dtype=np.float64)
    return float(out) if np.ndim(out) == 0 else out
