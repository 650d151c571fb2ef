"""Communication scheduling for parameter-server training DAGs.

Priority heuristics for parameter transfers (TIC, TAC), a deterministic
discrete-event simulator that enforces them, and makespan-based metrics.
"""

from .errors import (
    CoverageError,
    DegenerateBoundsError,
    DomainError,
    ParameterError,
    SchedError,
    ValidationError,
)
from .graph import (
    Graph,
    Op,
    OpKind,
    Partition,
    ResourceId,
    Unit,
    load_graph,
    make_graph,
    parse_graph,
    serialize_graph,
    topo_order,
)
from .metrics import (
    BruteForceResult,
    EfficiencyReport,
    MakespanBounds,
    brute_force_best,
    efficiency,
    efficiency_report,
    makespan_bounds,
    speedup,
)
from .properties import INF, PropertyMode, PropertyTable, find_dependencies, update_properties
from .rng import StableRng, derive_seed
from .schedulers import (
    PrioritySchedule,
    RecvProps,
    precedes,
    random_schedule,
    tac,
    tic,
)
from .sim import (
    Enforcement,
    IterationStats,
    SimPolicy,
    SimReport,
    chrome_trace,
    iteration_stats,
    simulate,
    simulate_cluster,
    worker_devices,
)
from .synthetic import (
    Shape,
    SyntheticSpec,
    expand_to_mr,
    generate_synthetic,
    reference_worker,
    worker_subgraph,
)
from .timing import (
    Origin,
    TimeOracle,
    TraceRecord,
    bandwidth_oracle,
    declared_oracle,
    estimate_from_traces,
    general_oracle,
)

__version__ = "0.1.0"
