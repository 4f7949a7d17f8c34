from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import InputError
from src.core.types import ArmSpace

from .events import LoggedEvent

log = logging.getLogger(__name__)

INTERVAL_LENGTH = 1000


@dataclass(frozen=True)
class ReplaySegment:
    """
    Events of one user-feature group in time order.

    `times` are rescaled over the whole log to [0, 1] and the arm space is the
    set of distinct item features of the whole log rescaled to [-1, 1], shared
    by every segment. Actions sharing an item feature collapse onto one arm.
    """

    key: str
    events: Tuple[LoggedEvent, ...]
    times: np.ndarray               # [n]
    arms: np.ndarray                # [n] arm index of the logged action
    space: ArmSpace
    arm_actions: Tuple[Tuple[int, ...], ...]  # [K] distinct actions per arm
    interval_length: int = INTERVAL_LENGTH

    def __len__(self) -> int:
        return len(self.events)

    @property
    def multiplicity(self) -> np.ndarray:
        return np.array([len(a) for a in self.arm_actions], dtype=np.int64)

    def intervals(self) -> List[Tuple[int, int]]:
        """[start, stop) bounds of consecutive chunks; policy state resets at each."""
        n, step = len(self.events), self.interval_length
        return [(s, min(s + step, n)) for s in range(0, n, step)]


def _unit(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def segment(events: Sequence[LoggedEvent], interval_length: int = INTERVAL_LENGTH,
            group_by: Optional[Sequence[int]] = None) -> List[ReplaySegment]:
    """
    Split events by user-feature tuple (or the positions in `group_by`).
    Segments come back sorted by key. A group whose events show fewer than two
    distinct item features is skipped with a warning.
    """
    if interval_length < 1:
        raise InputError("interval_length must be >= 1")
    if not events:
        return []

    ts = np.array([e.timestamp for e in events], dtype=np.float64)
    feats = np.array([e.item_feature for e in events], dtype=np.float64)
    t_lo, t_hi = float(ts.min()), float(ts.max())
    f_lo, f_hi = float(feats.min()), float(feats.max())

    # one catalog for the whole log; a group that never logged an action still offers it
    u_all = -1.0 + 2.0 * _unit(feats, f_lo, f_hi)
    coords = np.unique(u_all)
    arms_all = np.searchsorted(coords, u_all).astype(np.int64)
    actions: List[set] = [set() for _ in range(coords.shape[0])]
    for k, e in zip(arms_all, events):
        actions[int(k)].add(e.action)
    space = ArmSpace(coordinates=coords, diameter=2.0)
    arm_actions = tuple(tuple(sorted(a)) for a in actions)

    groups: Dict[str, List[int]] = defaultdict(list)
    for i, e in enumerate(events):
        uf = e.user_features if group_by is None else tuple(e.user_features[j] for j in group_by)
        groups["|".join(uf)].append(i)

    out: List[ReplaySegment] = []
    for key in sorted(groups):
        idx = sorted(groups[key], key=lambda i: ts[i])  # stable: ties keep file order
        idx = np.asarray(idx, dtype=np.int64)
        seen = int(np.unique(arms_all[idx]).shape[0])
        if seen < 2:
            log.warning("segment '%s' skipped: %d distinct item feature(s)", key, seen)
            continue
        out.append(ReplaySegment(
            key=key,
            events=tuple(events[int(i)] for i in idx),
            times=_unit(ts[idx], t_lo, t_hi),
            arms=arms_all[idx],
            space=space,
            arm_actions=arm_actions,
            interval_length=interval_length,
        ))
    log.info("%d segment(s) from %d group(s)", len(out), len(groups))
    return out
