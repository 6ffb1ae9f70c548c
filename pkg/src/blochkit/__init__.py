"""blochkit: complex Bloch dispersion, band gaps and subwavelength
resonances for photonic crystals with Drude-Lorentz permittivity."""

from .bandgap import (
    BandGap,
    GapCascade,
    GapKind,
    Side,
    cascade_near_pole,
    envelope_near_pole,
    find_gaps_complex,
    find_gaps_real,
)
from .dispersion1d import (
    BlochPoint,
    TailImReport,
    fold_kappa,
    fold_real,
    kappa_re_im,
    l1_l2,
    rhs_f,
    solve_kappa,
    tail_im_report,
)
from .errors import (
    BlochkitError,
    ComplexPermittivity,
    ConfigError,
    DampedModel,
    DegenerateContrast,
    DegenerateLattice,
    DilutenessWarning,
    DomainError,
    EigenFailure,
    MissingColumn,
    NoConvergence,
    NoFiniteSingularity,
    NoPole,
    NumericalError,
    ParseError,
    PolePencilSingular,
    QuadratureTooCoarse,
    SingularFrequency,
    SlowConvergence,
    ValidationError,
)
from .field1d import (
    ModeCoefficients,
    dispersion_residual,
    evaluate_field,
    mode_coefficients,
)
from .greens import SumControl, green_free, green_quasiperiodic, hankel0
from .lattice import (
    LatticeSpec,
    chain_lattice,
    dual_lattice,
    fold_to_brillouin,
    lattice_points_within,
    square_lattice,
)
from .permittivity import (
    ContrastValue,
    MaterialParams,
    SingularPair,
    contrast,
    eval_permittivity,
    singular_frequencies,
    wavenumbers,
)
from .resonance import (
    DiskQuadrature,
    OperatorBlocks,
    ParticleGeometry,
    ResonanceMatrix,
    assemble_blocks,
    constant_mode_projection,
    find_resonances,
    leading_eigenpair,
    lippmann_schwinger_residual,
    mod_floor,
    resonance_matrix,
    script_A,
    xi_contrast,
)

__version__ = "0.1.0"
