"""Labels for the regions of the (k, lambda) plane."""

from __future__ import annotations

import enum
from typing import NamedTuple


class ZoneKind(enum.Enum):
    DD = "DD"
    DE = "DE"
    DI = "DI"
    EI = "EI"
    EE = "EE"
    BOUNDARY = "Boundary"
    POINT = "PointSpectrum"
    GAP = "Gap"


class Zone(NamedTuple):
    """A zone label; ``which`` names the curve or point for BOUNDARY/POINT."""

    kind: ZoneKind
    which: str | None = None

    @property
    def is_open(self) -> bool:
        return self.kind in OPEN_ZONES

    def __str__(self) -> str:
        if self.which is None:
            return self.kind.value
        return f"{self.kind.value}({self.which})"


OPEN_ZONES = frozenset({ZoneKind.DD, ZoneKind.DE, ZoneKind.DI, ZoneKind.EI})

# admissible mode indices j for each zone carrying spectral density
MODE_INDICES: dict[ZoneKind, tuple[int, ...]] = {
    ZoneKind.DD: (-1, 1),
    ZoneKind.DI: (-1, 1),
    ZoneKind.DE: (1,),
    ZoneKind.EI: (-1,),
    ZoneKind.EE: (0,),
}


def as_kind(zone: Zone | ZoneKind | str) -> ZoneKind:
    if isinstance(zone, Zone):
        return zone.kind
    if isinstance(zone, ZoneKind):
        return zone
    return ZoneKind(zone)
