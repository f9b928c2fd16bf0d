"""Shared hand-built fixtures."""
import math

import numpy as np

from pairrank.ranker import RankerConfig, RankerState

# Five documents (0-based here) whose scores under theta = e1 are strictly
# decreasing.  With M = diag(1e12, 1, 1) and radius 1 the width of a pair is
# essentially the norm of its last two coordinates, which is tuned so that
# exactly the pairs (0,1), (2,4), (3,4) stay uncertain.
FIVE_DOCS = np.array(
    [
        [2.2, 0.06, 0.0],
        [2.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.8, 0.0, 0.02],
        [0.6, 0.0, 0.11],
    ]
)
FIVE_GRADES = np.array([4, 3, 2, 1, 0])
FIVE_UNCERTAIN = {(0, 1), (2, 4), (3, 4)}


def five_doc_model():
    """State and config whose radius is exactly 1 and whose scorer is e1."""
    cfg = RankerConfig(dim=3, lam=1.0, alpha_initial=1.0)
    design = np.diag([1e12, 1.0, 1.0])
    state = RankerState(
        theta=np.array([1.0, 0.0, 0.0]),
        design=design,
        design_inv=np.diag(1.0 / np.diag(design)),
        log_det=3 * math.log(cfg.lam),  # keeps the radius at its cold-start value
    )
    return state, cfg


def logistic_mp(z, dps=40):
    import mpmath

    mpmath.mp.dps = dps
    return float(1 / (1 + mpmath.exp(-mpmath.mpf(z))))


ACCEPTANCE_LINES: list[str] = []


def report(tag: str, name: str, passed: bool, detail: str) -> bool:
    line = f"[{'PASS' if passed else 'FAIL'}] {tag} {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line, flush=True)
    return passed
