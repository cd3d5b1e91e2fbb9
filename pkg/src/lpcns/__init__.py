"""Pseudo-spectral toolkit for dyadic frequency analysis of a barotropic
compressible flow model on the torus.

The layers build on each other: `grid` (lattice, transforms, calculus),
`dyadic` (Littlewood–Paley blocks), `besov` (block norms, hybrid
functionals, trajectory tracking), `paraproduct` (Bony decomposition and
the low-pass commutator), `semigroup` (the coupled linear propagator and
its φ-functions), `probes` (decay/growth scaling laws), `solver` (the
nonlinear marcher in velocity and momentum form), `experiments` (the
measurable-claim harness), and `config`/`snapshot`/`cli` (run plumbing).
"""

from .besov import (
    BesovIndex,
    IndexPair,
    NormTracker,
    besov_norm,
    block_lp_norms,
    chemin_lerner_norm,
    chemin_lerner_running,
    hybrid_X_norm,
    hybrid_Y_norm,
    validate_index_pair,
    x0_norm,
)
from .config import ConfigError, RunConfig, load_config, parse_config
from .dyadic import DyadicPartition, resolvable_range, spectral_dilate
from .grid import (
    GridSpec,
    RealField,
    SpectralField,
    divergence,
    gradient,
    inverse,
    leray_project,
    lp_norm,
    random_band_limited,
    transform,
)
from .paraproduct import (
    bony_pieces,
    lowpass_multiplier_commutator,
    paraproduct,
    remainder,
)
from .probes import (
    ProbeResult,
    ProbeSpec,
    WaveGrowthResult,
    WrapGuardError,
    fit_line,
    low_decay_probe,
    parabolic_band_probe,
    scaling_identity_check,
    wave_growth_probe,
)
from .semigroup import (
    GreenSymbol,
    LameParams,
    apply_green,
    eigenvalues,
    green_scalars,
    phi1,
    phi2,
    solve_linear_duhamel,
)
from .snapshot import SnapshotError, read_snapshot, read_state, write_snapshot, write_state
from .solver import (
    BlowupError,
    PressureLaw,
    SimulationResult,
    StateAM,
    StateUV,
    StepSizeError,
    VacuumError,
    am_to_uv,
    simulate,
    uv_to_am,
)

__version__ = "0.1.0"
