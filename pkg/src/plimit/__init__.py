"""plimit: two-phase quasilinear conductivity solver and large-boundary-data
limit laboratory.

Subpackages:

* ``energy``     pointwise Dirichlet-energy densities and assumption validators
* ``geometry``   structured two-phase triangulations
* ``solver``     P1 assembly and constrained damped-Newton minimization
* ``limit_lab``  lambda sweeps, limit solutions, bound checks, counterexample
* ``cli``        the ``plimit`` command-line front end
"""

from .energy import (
    EnergyDensity,
    GrowthBounds,
    OscillatingPsiSpec,
    build_counterexample_psi,
    check_growth_bounds,
    estimate_asymptotic_weight,
    eval_J,
    eval_Q,
    eval_sigma,
    oscillating_psi,
    power_law,
    user_closed_form,
)
from .geometry import (
    DomainSpec,
    Mesh2D,
    RegionMap,
    boundary_nodes,
    build_domain,
    extract_submesh,
    read_mesh,
    write_mesh,
)
from .limit_lab import (
    CounterexampleReport,
    LimitBundle,
    SweepRecord,
    check_bound_56_57,
    check_fundamental_inequality,
    compute_l1_l2,
    compute_limit_bundle,
    run_counterexample,
    run_lambda_sweep,
)
from .solver import (
    BoundaryCondition,
    DiscreteField,
    SolveResult,
    SolveSettings,
    assemble_energy,
    assemble_gradient,
    minimize,
    solve_limit_A_inner,
    solve_limit_B_pei,
    solve_limit_pec,
    trace_on,
    wp_distance,
)

__version__ = "0.1.0"
