"""Slow-light solitons of the driven three-level medium.

The package constructs the exact soliton riding a time-dependent
controlling field, tracks its deceleration and stopping, and verifies
every constructed solution against the governing Maxwell-Bloch
equations with an independent finite-difference oracle.

Typical use::

    from slowlight import (
        spectral_derive, PhysicalParams, ExponentialOffField,
        default_grid, solve_w_picard, trajectory, stop_report,
    )

    params = PhysicalParams(nu0=2.0)
    field = ExponentialOffField(amplitude=0.6, alpha=4.0)
    s = spectral_derive(-1j, field.omega0)
    bg = solve_w_picard(field, s, default_grid(field, s))
    print(stop_report(bg, params))
"""

from .background import (
    BackgroundSolution,
    ConstantField,
    ControlField,
    ExponentialOffField,
    InstantOffField,
    SampledField,
    TanhRampField,
    TauGrid,
    closed_form_instant_off,
    default_grid,
    fixed_point_residual,
    solve_background,
    solve_w_picard,
    solve_w_riccati,
)
from .dynamics import (
    StopReport,
    Trajectory,
    bit_width,
    measure_bit_width,
    relative_distance,
    relative_distance_double,
    relative_distance_series,
    stop_report,
    stopping_distance,
    trajectory,
    velocity,
    zs_functionals,
)
from .errors import (
    DegenerateSpectrumError,
    DivergenceError,
    GridError,
    InvalidSolitonError,
    OutOfRangeError,
    ScenarioError,
    SlowlightError,
    SmoothnessWarning,
    TruncationError,
    ValidationError,
)
from .model import (
    AtomicState,
    ComovingPoint,
    PhysicalParams,
    SpectralPoint,
    from_lab_frame,
    spectral_derive,
    to_lab_frame,
)
from .soliton import (
    MemoryBitProfile,
    SnapshotGrid,
    SolitonPhase,
    approx_constant_soliton,
    atomic_state,
    fields,
    memory_bit_profile,
    phase_slopes,
    phases,
    sample_grid,
)
from .verify import (
    CheckResult,
    ConvergenceReport,
    InvariantReport,
    ResidualReport,
    convergence_study,
    invariant_suite,
    mb_residual,
)

__version__ = "0.1.0"
