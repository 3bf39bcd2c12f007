"""Single cavity mode coupled to a time-dependent squeezed-vacuum reservoir.

Two independent propagators are provided: direct adaptive integration of
the master equation (:mod:`.liouvillian`) and the exact su(1,1) solution
(:mod:`.analytic`). :mod:`.diagnostics` measures squeezing and convergence,
:mod:`.cli` drives configuration-file runs and sweeps.
"""

__version__ = "0.1.0"

from .analytic import (
    GaugeSample,
    GaugeSolution,
    analytic_propagate,
    analytic_trajectory,
    apply_exp_Kminus,
    asymptotic_state,
    component_rho_nm,
    solve_gauge,
)
from .diagnostics import (
    convergence_study,
    fidelity,
    mean_photon_number,
    purity,
    quadrature_variances,
    trace_distance,
)
from .fock import (
    InitialStateSpec,
    SqueezeParams,
    ThermalReservoir,
    bogoliubov_transform,
    density_from_spec,
    make_ladder,
    make_squeeze_operator,
    squeezed_vacuum_state,
)
from .liouvillian import (
    Trajectory,
    build_lindblad,
    build_rate_operator,
    devectorize,
    integrate,
    make_K_generators,
    spectrum,
    steady_state_numeric,
    vectorize,
)
from .profiles import Constant, ExponentialSwitch, GaussianPulse, LinearRamp, Piecewise
