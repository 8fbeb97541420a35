"""Numerical right-equivalence of polynomial germs.

Given two germs f, g: (R^n, 0) -> (R, 0), the package samples the
derivative-ratio bounds sufficient for C^r-right equivalence, transports
sample points along the homotopy f + t(g - f) to build the equivalence
map phi with f = g(phi(x)), and estimates the gradient-inequality
exponent that equivalence preserves.
"""

from .condition import (
    ConditionReport,
    DistBoundReport,
    ExponentComparison,
    InsufficientSamplesError,
    LojasiewiczEstimate,
    RatioRecord,
    SamplingSpec,
    Verdict,
    check_c0_criterion,
    check_cr_criterion,
    compare_exponents,
    estimate_gradient_dist_bound,
    estimate_lojasiewicz,
    lojasiewicz_spec,
    multi_indices_upto,
    sample_domain,
)
from .flow import (
    DiffeoMap,
    Direction,
    DisplacementProfile,
    DomainError,
    EquivalenceReport,
    FlowError,
    HomotopySystem,
    IntegrationError,
    IntegratorSettings,
    PoleError,
    SingularSetApprox,
    SingularityError,
    Trajectory,
    conservation_check,
    diffeo_forward,
    diffeo_inverse,
    displacement_profile,
    integrate_trajectory,
    numeric_jacobian,
    verify_equivalence,
)
from .germ import (
    GermConstraintError,
    MultiIndex,
    ParseError,
    Poly,
    PolyGerm,
    parse,
    parse_poly,
    serialize,
)
from .jacobi import (
    IdealPowerElement,
    JacobiIdealBasis,
    assemble_element,
    generate_pair,
    generator_count,
    ideal_power_generators,
    random_multipliers,
    verify_ideal_pair,
)

__version__ = "0.1.0"
