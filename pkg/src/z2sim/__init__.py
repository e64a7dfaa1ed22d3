"""State-vector simulation of digital adiabatic sweeps of quantum Z2 lattice
gauge theory on periodic square lattices in two and three dimensions.
"""

from .evolution import AdiabaticSchedule, ErrorEstimate, adiabaticity_report, error_bound, run_adiabatic
from .lattice import LatticeSpec, build, noncontractible_loop, thooft_surface, wilson_contours
from .statevector import GateOp, StateVector

__all__ = [
    "AdiabaticSchedule",
    "ErrorEstimate",
    "GateOp",
    "LatticeSpec",
    "StateVector",
    "adiabaticity_report",
    "build",
    "error_bound",
    "noncontractible_loop",
    "run_adiabatic",
    "thooft_surface",
    "wilson_contours",
]

__version__ = "0.1.0"
