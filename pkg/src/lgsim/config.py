"""Run configuration and the registered catalog mutants."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from typing import Optional

CATALOG_VERSION = 1


class Mutant(Enum):
    """Deliberate single-guard/action defects used to demonstrate the
    detection power of the monitor and explorer.  Mutant runs watermark
    every produced file, so their traces cannot pass as nominal evidence.
    """

    # Gear extension no longer waits for the doors to be seen open.
    DropDoorGuardOnExtend = "drop-door-guard"
    # The hydraulic cut (stop of general_EV) no longer waits for its turn
    # in the retraction step table, so pressure can drop mid-maneuver.
    DropGeneralEVGuard = "drop-general-ev-guard"
    # Output promotion uses AND instead of OR.
    SwapMergeToAND = "swap-merge-to-and"
    # Inputs are spawned into module 1 only; module 2 keeps stale copies.
    SkipSpawn = "skip-spawn"


@dataclass(frozen=True)
class SimConfig:
    voting_threshold: int = 1
    interleaved_devices: bool = False
    mutant: Optional[Mutant] = None

    def digest(self) -> str:
        payload = json.dumps(
            {
                "catalog_version": CATALOG_VERSION,
                "voting_threshold": self.voting_threshold,
                "interleaved_devices": self.interleaved_devices,
                "mutant": self.mutant.value if self.mutant else None,
            },
            sort_keys=True,
        )
        return hashlib.blake2b(payload.encode(), digest_size=8).hexdigest()
