from .grid import ONE_SIDED, SUMMATION_BY_PARTS, Grid, difference
from .engine import (
    Compatibility,
    SimulationBlowUp,
    check_compatibility,
    energy,
    final_state,
    sample_initial_state,
    simulate,
    time_step,
)
from .trajectory import Trajectory, export_csv
