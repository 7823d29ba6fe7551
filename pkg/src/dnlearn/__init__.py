"""Dirichlet-Neumann learning for 2-D elliptic interface problems."""

from dnlearn.nets import (  # noqa: F401
    Jet2,
    JetTerm,
    MlpNet,
    MlpSpec,
    audit_jets,
    eval_channels,
    forward,
    forward_jet,
    init_params,
    load_checkpoint,
    objective_value,
    objective_value_and_grad,
    parameter_gradient,
    save_checkpoint,
)
from dnlearn.optim import (  # noqa: F401
    AdamWHyper,
    LrSchedule,
    TrainDivergence,
    train,
)
from dnlearn.geometry import (  # noqa: F401
    EvalGrid,
    Geometry,
    SampleCounts,
    SampleSet,
    eval_grid,
    sample_sets,
)
from dnlearn.problems import (  # noqa: F401
    InterfaceProblem,
    VerifyReport,
    example_checkerboard,
    example_circle,
    example_zigzag,
    problem_by_name,
    verify_manufactured,
)
from dnlearn.losses import (  # noqa: F401
    PenaltyConfig,
    default_penalties,
    dirichlet_terms,
    neumann_terms,
    objective_dirichlet,
    objective_neumann,
)
from dnlearn.oracle1d import (  # noqa: F401
    Grid1d,
    contraction_factor_1d,
    dn_iterate_1d,
    fd_dirichlet_1d,
    fd_robin_1d,
    robin_rate_study,
)
from dnlearn.dn_solver import (  # noqa: F401
    DnConfig,
    InterfaceTrace,
    RunResult,
    interface_gradient_evals,
    outer_loop,
    relax_update,
    run_dnla,
    solve_dirichlet,
    solve_neumann,
)
from dnlearn.deepddm import (  # noqa: F401
    DdmConfig,
    ddm_flux_target,
    interface_flux_error,
    run_deepddm,
)
from dnlearn.metrics import (  # noqa: F401
    MetricRow,
    aggregate,
    error_fields,
    relative_l2,
)
from dnlearn.reporting import (  # noqa: F401
    ExperimentConfig,
    load_config,
    render_report,
    run_experiment,
)

__version__ = "0.1.0"
