"""Gabor-frame discretization and time-frequency analysis of Fourier integral
operators with smooth phases: STFT and Gabor frame machinery, canonical
transformations, sparse Gabor matrices of oscillatory-integral operators, and
quantitative decay / modulation-norm experiments at desk scale.
"""

__version__ = "0.1.0"

from .errors import (
    AliasingError,
    CausticError,
    ConditionViolation,
    ConfigError,
    ContractViolation,
    GaborFioError,
    NewtonError,
    NonRepresentableDilation,
    NotAFrameError,
)
from .grid import (
    Grid,
    SampledFunction,
    dirac,
    fourier_transform,
    gaussian,
    inner,
    inverse_fourier_transform,
    modulate,
    random_bandlimited,
    translate,
)
from .gabor import (
    GaborSystem,
    Lattice,
    MixedNormSpec,
    STFTField,
    analyze,
    dual_window,
    frame_bounds,
    frame_operator,
    gabor_system,
    gram_matrix,
    mixed_seq_norm,
    stft,
    synthesize,
    tight_window,
)
from .phase import (
    CanonicalMap,
    GenericPhase,
    QuadraticPhase,
    canonical_map,
    canonical_map_quadratic,
    check_phase_conditions,
    phase_catalog,
    x_gradient_diameter,
)
from .fio import (
    CallableSymbol,
    ConstantSymbol,
    DiscretizedFIO,
    GaborMatrix,
    GridSymbol,
    apply_fio,
    apply_via_matrix,
    gabor_matrix_direct,
    gabor_matrix_via_symbol_stft,
    symbol_catalog,
)
from .analysis import (
    DecayReport,
    NormRatioReport,
    SchurReport,
    decay_report,
    m_infty_1_norm_estimate,
    mod_norm,
    operator_norm_experiment,
    schur_sums,
)
from .metaplectic import (
    ElementaryFactor,
    apply_factors,
    factorize,
    free_particle,
    hamiltonian_flow,
    harmonic_oscillator,
    schrodinger_demo,
    symplectic_form,
    symplectic_to_phase,
)
