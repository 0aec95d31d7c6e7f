"""Exact two-boson contact-interaction trap model and its quench dynamics."""

__version__ = "0.1.0"

from .errors import (
    BracketError,
    ConfigError,
    DegenerateCouplingError,
    DegenerateOverlapError,
    InvariantError,
    PoleError,
    QuenchDuoError,
    SeriesError,
)
from .specfun import (
    CONVENTIONS,
    Conventions,
    HoBasisSlice,
    SignedLogValue,
    digamma,
    gamma_ratio,
    ho_at_origin,
    ho_values,
    ho_values_grid,
    ln_gamma_signed,
    tricomi_u_half,
)
from .spectrum import (
    EvenLevel,
    SpectrumTable,
    busch_residual,
    odd_level_energy,
    solve_even_energies,
    solve_even_energy,
    spectrum_scan,
    sum_identity_check,
)
from .eigenstates import (
    RelEigenstate,
    TwoBodyState,
    build_rel_eigenstate,
    cm_ground,
    eval_rel_closed,
    eval_rel_series,
    eval_total,
    normalization_constant,
    rel_profile_closed,
)
from .quench import (
    ConvergenceRow,
    FidelitySeries,
    FidelitySpectrum,
    OverlapTable,
    QuenchScenario,
    convergence_report,
    fidelity_series,
    fidelity_spectrum,
    overlap_closed,
    overlap_quadrature,
    overlap_series,
    overlap_table,
    rel_field_t,
    wavefunction_t,
)
from .observables import (
    Grid2D,
    MomentumDistribution,
    NaturalDecomposition,
    OneBodyDM,
    TwoBodyDensity,
    breathing_series,
    dominant_frequency,
    momentum_distribution,
    natural_backend_report,
    natural_decomposition,
    natural_orbitals_paper,
    natural_populations_paper,
    rho1_from_field,
    rho2_from_field,
    stationary_field,
    trapezoid_weights,
)
