"""Log-space arithmetic primitives.

All probabilities in this package are carried as natural-log values.
``LOG_ZERO`` (negative infinity) is a first-class score: ``x + LOG_ZERO``
is ``LOG_ZERO`` and ``log_add(LOG_ZERO, x)`` is ``x``, so impossible
events propagate without ever producing NaN.
"""

from __future__ import annotations

import math

import numpy as np

LOG_ZERO = float("-inf")

LOG10 = math.log(10.0)


def log_add(a: float, b: float) -> float:
    """Numerically stable log(exp(a) + exp(b)) for scalars."""
    if a == LOG_ZERO:
        return b
    if b == LOG_ZERO:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


def log_sum(values) -> float:
    """log of the sum of exponentials over an iterable of scalars."""
    acc = LOG_ZERO
    for v in values:
        acc = log_add(acc, v)
    return acc


def log_sum_rows(matrix: np.ndarray) -> np.ndarray:
    """Row-wise logsumexp of a 2-D array, -inf rows handled cleanly."""
    m = np.max(matrix, axis=1)
    out = np.full(matrix.shape[0], LOG_ZERO)
    finite = np.isfinite(m)
    if np.any(finite):
        shifted = matrix[finite] - m[finite, None]
        out[finite] = m[finite] + np.log(np.sum(np.exp(shifted), axis=1))
    return out


def log10_to_ln(x: float) -> float:
    return x * LOG10


def ln_to_log10(x: float) -> float:
    return x / LOG10
