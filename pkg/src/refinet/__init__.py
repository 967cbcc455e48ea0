"""Growable dense networks built on refinable activation functions."""

from .activations import (
    DEFAULT_TABLE_LEVELS,
    Activation,
    IdentityActivation,
    IdentitySumData,
    RefinabilityData,
    SplineActivation,
    TabulatedActivation,
    activation_from_descriptor,
    sigma_prime_from_value,
    spline_phi,
    spline_sigma,
    spline_sigma_prime,
)
from .errors import (
    DataError,
    DatasetError,
    DegreeTooSmall,
    DimensionMismatch,
    DomainError,
    EmptyArchitecture,
    EmptyDataset,
    NoFollowingLayer,
    NotConvergent,
    NotFactorable,
    NotRefinable,
    ParseError,
    PositionOutOfRange,
    PreconditionError,
    UnsupportedDegree,
    UsageError,
)
from .network import (
    Dataset,
    LayerOp,
    Network,
    backprop,
    dataset_loss,
    deserialize,
    forward,
    forward_batch,
    forward_layer,
    gradient_descent,
    init_random,
    load_dataset,
    load_network,
    save_dataset,
    save_network,
    serialize,
)
from .subdivision import (
    DyadicTable,
    LaurentPoly,
    Mask,
    bspline_mask,
    check_convergence_necessary,
    check_polynomial_generation,
    factor_difference_scheme,
    format_pairs,
    is_monotone_scheme,
    laurent_mul,
    laurent_upsample,
    subdivide,
    tabulate_basic_limit,
    tabulate_sigma_from_step,
)
from .transform import (
    GrowthReport,
    InsertVariant,
    check_domain,
    compute_beta_post,
    compute_beta_pre,
    insert_layer,
    max_deviation,
    split_neuron,
    widen_layer,
)

__version__ = "0.1.0"
