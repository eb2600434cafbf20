"""Simulation and analysis of EPRB polarization-correlation experiments.

Submodules
----------
quantum      density operators, polarizer observables, dephasing channels
lhv          local hidden-variable models and shot sampling
consistency  consistency inequalities, CHSH facets, local-polytope membership
harness      simulated experiments, shot files, correlation estimates
reporting    inequality reports (JSON, CSV, text)
cli          ``eprbkit`` command-line tool
"""

from .consistency import (
    ConsistencyInequality,
    EqualityProbabilities,
    chsh_s,
    chsh_value,
    correlation_from_prob,
    correlation_from_shots,
    derive_chsh_facets,
    evaluate,
    generate_consistency_inequalities,
    lhv_membership,
    lhv_membership_batch,
    prob_from_correlation,
    verify_boolean_derivation,
)
from .harness import ExperimentConfig, LhvSource, QmSource, estimate, run_experiment
from .labels import CorrelationSet, ShotRecord, UnmeasuredCorrelationError
from .lhv import (
    FiniteDomain,
    IntervalDomain,
    LhvModel,
    deterministic_strategies,
    lhv_correlation,
    sample_shot,
)
from .quantum import (
    DensityOperator,
    Observable,
    PureState,
    bell_state,
    dephase,
    expectation,
    joint_probabilities,
    measure_collapse,
    partial_dephase,
    polarizer_observable,
    rotated_bell_state,
)

__version__ = "0.1.0"
