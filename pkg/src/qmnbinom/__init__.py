"""Evaluation, sampling and exact verification of the (q, mu, nu)-deformed binomial
distribution, with discrete-time TASEP and zero-range simulators driven by it."""

from .distribution import (
    INF,
    TAIL_EPSILON,
    ConvergenceError,
    PmfTable,
    SampleStream,
    pmf,
    pmf_table,
    pmf_table_infinite,
    sample,
)
from .identities import (
    CheckRecord,
    Provenance,
    Report,
    STable,
    default_grid,
    mc_duality_check,
    s_direct,
    s_direct_table,
    s_recurrence_table,
    verify_lemma_recursion,
    verify_normalization,
    verify_recurrence_consistency,
    verify_route_equivalence,
    verify_symmetry,
)
from .processes import (
    OccupationConfig,
    ParticleConfig,
    TrajectorySummary,
    boson_step,
    run_ensemble,
    tasep_step,
)
from .qseries import Backend, DeformParams, InvalidParameters, q_binomial, q_pochhammer

__version__ = "0.1.0"
