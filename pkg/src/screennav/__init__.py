"""Deterministic screen-navigation simulation engine.

Builds navigable screen trees, renders clickable screenshots, runs episodes
under a strict action grammar, scores predictions with a composite reward,
synthesizes supervised datasets and perturbation variants, and benchmarks
agents statically and interactively.
"""

__version__ = "0.1.0"

from .compositor import (  # noqa: F401
    BBox,
    EnvBundle,
    IconInstance,
    LayoutPolicy,
    ScreenSpec,
    build_environment,
    load_bundle,
    render_screen,
    save_bundle,
)
from .episode import (  # noqa: F401
    Action,
    ActionKind,
    Episode,
    Observation,
    StepResult,
    TaskSpec,
    hit_test,
    parse_action,
    reset,
)
from .graph import (  # noqa: F401
    BranchingSpec,
    EdgeKind,
    NavGraph,
    SplitRole,
    TransitionMap,
    build_tree,
    distance_histogram,
    partition_subtrees,
    shortest_path,
    transition_map,
)
from .rewards import (  # noqa: F401
    ReferenceStep,
    RewardBreakdown,
    composite_reward,
    reward_coord,
    reward_format,
    reward_intent,
    reward_type,
)
from .tasks import (  # noqa: F401
    StepInstance,
    Trajectory,
    TrajectoryKind,
    enumerate_tasks,
    expand_steps,
    read_dataset,
    synth_icon_data,
    synth_trajectory,
    write_dataset,
)
from .variants import VariantSpec, apply_variant  # noqa: F401
