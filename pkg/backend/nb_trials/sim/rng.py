"""Per-replication random streams derived from one master seed."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ReplicationStreams:
    control: np.random.Generator
    active: np.random.Generator

    def for_arm(self, arm: int) -> np.random.Generator:
        return self.active if arm else self.control


def make_streams(master_seed: int, replication: int) -> ReplicationStreams:
    """Independent generators for the two arms of one simulated trial.

    Streams depend only on (master_seed, replication), so a replication
    draws the same data whichever worker runs it.

      replication
        ├── control
        └── active
    """
    root = np.random.SeedSequence([master_seed, replication])
    ss_control, ss_active = root.spawn(2)
    return ReplicationStreams(
        control=np.random.default_rng(ss_control),
        active=np.random.default_rng(ss_active),
    )
