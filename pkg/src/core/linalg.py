from __future__ import annotations

import logging
from typing import Sequence, Tuple

import numpy as np
from scipy import linalg

from .errors import FactorizationError

log = logging.getLogger(__name__)


def jittered_cholesky(a: np.ndarray, jitters: Sequence[float]) -> Tuple[np.ndarray, float]:
    """
    Lower Cholesky factor of a + j*I for the first j in `jitters` that works.
    returns: (L, j)
    """
    eye = np.eye(a.shape[0])
    for j in jitters:
        try:
            L = linalg.cholesky(a + j * eye if j else a, lower=True, check_finite=False)
        except linalg.LinAlgError:
            continue
        if j:
            log.debug("cholesky needed jitter %.1e (n=%d)", j, a.shape[0])
        return L, float(j)
    raise FactorizationError(
        f"matrix of size {a.shape[0]} not positive definite even with jitter {jitters[-1]:.1e}"
    )


def escalating(start: float, stop: float, factor: float = 10.0) -> Tuple[float, ...]:
    """(0, start, start*factor, ...) up to and including stop."""
    out = [0.0]
    j = start
    while j <= stop * (1.0 + 1e-9):
        out.append(j)
        j *= factor
    return tuple(out)
