"""Time-domain Maxwell solver (Yee grid, dispersive media, CPML)."""

from .core import (DivergenceError, Grid, PlacementError, RunResult,
                   Simulation, drude_equivalent)
from .monitors import (EnergyTrace, FluxMonitor, FrequencyMonitor,
                       MonitorError, TimeProbe, TimeSnapshots)
from .sources import DipoleSource, circular_pair

__all__ = [
    "DivergenceError", "Grid", "PlacementError", "RunResult", "Simulation",
    "drude_equivalent", "EnergyTrace", "FluxMonitor", "FrequencyMonitor",
    "MonitorError", "TimeProbe", "TimeSnapshots", "DipoleSource",
    "circular_pair",
]
