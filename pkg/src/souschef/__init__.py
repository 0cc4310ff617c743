"""Kitchen planning games with explained action recommendations.

A deterministic cooking game (chop, cook, plate, deliver against meal
deadlines), an optimal planner for it, an advisor that recommends the
next action with one of three explanation styles, controlled corruption
of that advice for trust studies, simulated players and outcome
metrics, and an HTTP service that runs the whole study flow.
"""

from .advisor import (
    Advisor,
    AdvisorConfig,
    CONDITIONS,
    CORRUPTED,
    DEFAULT_CORRUPTION_PROB,
    NoFutureMealError,
    OPTIMAL,
    PlanPair,
    Recommendation,
    condition_config,
    corrupt,
    corruptible_positions,
    divergence_index,
    draw_provenance,
)
from .explain import (
    CausalLink,
    ExplanationRendering,
    Lexicon,
    LexiconError,
    MealPhrases,
    MODES,
    SubgoalAttribution,
    attribute_subgoals,
    base_clause,
    extract_causal_links,
    meal_requirements,
    render,
)
from .kitchen import (
    ConfigError,
    GameConfig,
    GameOverError,
    IllegalActionError,
    IngredientSpec,
    KitchenEvent,
    MealSpec,
    bundled_game_ids,
    check_state_invariants,
    compile_game,
    ground_kitchen,
    legal_actions,
    load_bundled,
    load_config,
    parse_plan_file,
    parse_snapshot,
    resolve_config,
    step,
    write_plan_file,
    write_snapshot,
)
from .logs import (
    EventRecord,
    LogEntry,
    LogFormatError,
    RecommendationRecord,
    SessionLog,
    VoteRecord,
    canonical_json,
    replay,
)
from .metrics import (
    MetricsReport,
    PolicySpec,
    deliveries_from_log,
    oac,
    play_game,
    pref_tally,
    report,
    run_experiment,
    saa,
    upc,
    upc_raw,
    write_summary,
)
from .model import (
    ActionSpec,
    CookGuard,
    Domain,
    Fluent,
    GroundAction,
    InapplicableActionError,
    Param,
    Plan,
    PlanCheck,
    PlanningProblem,
    State,
    Subgoal,
    apply,
    fluent,
    is_applicable,
    make_plan,
    overtime_cost,
    parse_fluent,
    plan_cost,
    plan_overtime,
    validate,
)
from .planner import (
    BudgetExhaustedError,
    DepthBoundError,
    PlannerBudget,
    PlanningCancelled,
    PlanningError,
    UnsolvableError,
    brute_force_solve,
    replan,
    solve,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
