"""Teleportation of bosonic modes under particle-number conservation.

Closed-form fidelity and entanglement, Haar Monte Carlo estimates and a
brute-force joint-state oracle for the two-mode protocol, a resource-state
catalog, and the many-mode generalization.
"""
from .fock import (
    AnnihilatedError,
    FockLabel,
    JointState,
    PureNumberState,
    ResourceState,
    StateError,
    TwoModeDensity,
    log_binomial,
    negativity,
    negativity_via_partial_transpose,
    partial_trace_23,
)
from .kernels import BACKEND
from .metrics import (
    HaarSampler,
    avg_entanglement_monte_carlo,
    avg_final_entanglement,
    fidelity_closed_form,
    fidelity_monte_carlo,
    haar_moment,
    haar_negativity_monte_carlo,
    sample_haar,
    teleport_report,
    triangle_bound_check,
)
from .multimode import (
    block_dimension,
    fidelity_multimode,
    fidelity_multimode_monte_carlo,
    product_resource_lower_bound,
)
from .protocol import (
    MeasurementBasis,
    OutcomeLabel,
    TeleportReport,
    apply_measurement,
    averaged_channel,
    bob_correction,
    build_measurement_basis,
    cardinality,
    dilated_correction_check,
    oracle_full_protocol,
)
from .resources import (
    RegimeLabel,
    ResourceKind,
    ResourceSpec,
    analytic_performance,
    bose_hubbard_ground_state,
    build_resource,
    classify_regime,
    gaussian_double,
    gaussian_single,
    noon_reduction_dilation_check,
    phase_absorber,
    repeated_teleportation_probability,
)

__version__ = "0.1.0"
