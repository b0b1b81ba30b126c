"""Command handler module"""

from .cross_spectrum import run_cross_spectrum
from .effective import run_critical_pitch, run_effective, run_phase_diagram
from .frenet import run_frenet
from .tube_bind import run_tube_bind

HANDLERS = {
    "frenet": run_frenet,
    "cross-spectrum": run_cross_spectrum,
    "tube-bind": run_tube_bind,
    "effective": run_effective,
    "critical-pitch": run_critical_pitch,
    "phase-diagram": run_phase_diagram,
}

__all__ = ['HANDLERS', 'run_frenet', 'run_cross_spectrum', 'run_tube_bind', 'run_effective',
           'run_critical_pitch', 'run_phase_diagram']
