"""The Ruzsa triangle inequality for abstract difference operations, exact
on finite groups and approximate on metric spaces with dilations."""

from .delta_core import (
    AxiomReport,
    DeltaStructure,
    FiniteSet,
    InjectionWitness,
    RuzsaResult,
    Sampled,
    Section,
    build_injection,
    build_section,
    check_axiom1,
    check_axiom2,
    check_weak_axioms,
    delta_set,
    reconstruct,
    ruzsa_inequality,
)
from .dilations import (
    DilationSpace,
    EuclideanSpace,
    HeisenbergSpace,
    approx_difference,
    check_approx_axiom1,
    convergence_table,
    limit_difference,
    parse_space,
)
from .groups import (
    FiniteGroup,
    cyclic,
    dihedral,
    direct_product,
    group_delta,
    heisenberg_mod,
    parse_fixture,
    relabeled_delta,
    symmetric,
)
from .metric_ruzsa import (
    MetricInjectionWitness,
    SeparatedSet,
    ThresholdReport,
    approx_delta_set,
    estimate_threshold,
    metric_injection,
    sample_ruzsa_configuration,
    sample_separated_set,
    separation,
)

__version__ = "0.1.0"
