"""Exact-arithmetic toolkit for one-sided matching-market equilibria."""

from .market import (
    AgentGroup,
    Allocation,
    Bundle,
    GoodGroup,
    GroupedMarket,
    PriceVector,
    allocation,
    bundle_of,
    make_market,
    normalize_prices,
    pareto_dominates,
    price_vector,
    rat,
    rat_str,
    social_welfare,
    validate_market,
)
from .demand import (
    DualCertificate,
    check_basic_facts,
    dual_optimum,
    optimal_bundle,
    optimal_value,
    suboptimality,
)
from .equilibrium import (
    EquilibriumCluster,
    Verdict,
    bundle_feasibility,
    find_equilibria,
    verify_approx,
    verify_exact,
    verify_relaxed,
)
from .threshold import Profile, ThresholdGame, profile, solve_brute_force, threshold_game, verify_profile
from .reductions import (
    build_edge_environment,
    build_ppad_market,
    build_sat_market,
    build_toy_submarket,
    classify_variable_gadget,
    completeness_equilibrium,
    extract_assignment,
    extract_threshold_profile,
    measure_edge_gadget,
    pad_market,
    predict_edge_gadget,
    predict_variable_prices,
    unpad_equilibrium,
)

__version__ = "0.1.0"
