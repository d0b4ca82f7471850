"""Translated dyadic filtrations and exact BMO / H^1 comparisons on T, T^m and R."""
from .bmo import (
    DyadicChains,
    classical_bmo_lower_bound,
    dyadic_bmo_norm,
    dyadic_maximal,
    dyadic_sharp_function,
    hl_maximal_lower,
    mean_oscillation,
    pointwise_domination,
    proof_trace,
    sharp_function,
    verify_equivalence,
)
from .circle import (
    Arc,
    DyadicInterval,
    FitResult,
    InadmissibleShift,
    Shift,
    dyadic_distance,
    fit_interval,
    pairwise_distance,
)
from .corpus import generate_corpus
from .hardy import Atom, AtomicCombination, atomize_dyadic, decompose_h1, is_atom
from .harness import ExperimentConfig, RunReport, run_experiment, scan_d_delta
from .multidim import (
    Box,
    GridFn,
    RLevelSystem,
    ShiftFamily,
    build_r_filtration,
    cube,
    dyadic_bmo_norm_md,
    fit_cube,
    fit_interval_r,
    verify_equivalence_md,
)
from .rational import Rat, rat
from .stepfn import StepFn

__version__ = "0.1.0"
