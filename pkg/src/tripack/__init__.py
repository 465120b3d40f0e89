"""Triangle packing process laboratory.

Simulators for the online K_{1,1,s} packing process and its companions on
random graphs, deterministic trajectory numerics with the derived threshold
constants, empirical dynamic-concentration reports, and exact packing/cover
oracles for small instances.
"""

from .backend import BACKEND, USE_NUMBA
from .concentration import ConcentrationReport, SamplePlan, build_plan, measure, run_concentration, structural_checks
from .graph import (
    EdgeStateGraph,
    EdgeStream,
    complete_graph,
    gnm_graph,
    load_edge_list,
    new_graph,
    save_edge_list,
    stream_next,
)
from .ode import (
    CurveTable,
    constants,
    default_table,
    deterministic_families,
    error_envelope,
    l_nu,
    l_nu_star,
    ode_residual,
    ratio_sup,
    tabulate,
    threshold_c1,
    threshold_c2,
    threshold_c2_exact,
    threshold_tf,
    tuza_window,
    u_tau,
    upsilon,
    zeta,
)
from .oracle import (
    OracleResult,
    build_triangle_system,
    exact_nu,
    exact_tau,
    independent_triangle_count,
    solve,
    verify_tuza_batch,
)
from .processes import (
    Checkpoint,
    ProcessTrace,
    aggregate,
    predictions,
    run_many,
    run_packing,
    run_packing_sprinkled,
    run_random_triangle_removal,
    run_reverse_triangle_free,
    run_triangle_free,
    run_triangle_only,
)

__version__ = "0.1.0"
