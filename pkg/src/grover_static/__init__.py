"""Gate-level simulation of Grover search under static qubit imperfections."""

from .circuit import (
    GroverCircuit,
    apply_circuit,
    apply_ideal_grover,
    build_generalized_toffoli,
    build_grover_iteration,
    count_gate_slots,
    grover_frequency,
    grover_period,
)
from .config import ExperimentConfig
from .exceptions import (
    CapacityError,
    ConfigError,
    DomainError,
    FitError,
    PartialEnsembleError,
    SizeError,
)
from .imperfections import (
    DisorderRealization,
    QubitLattice,
    StaticNoise,
    apply_noise_propagator,
    build_lattice,
    dense_expm_oracle,
    sample_disorder,
)
from .observables import (
    HusimiGrid,
    SpectralDensity,
    TimeSeries,
    fidelity,
    husimi,
    spectral_density,
    spectral_peaks,
    time_average,
    w_4,
    w_g,
)
from .runner import (
    EnsembleResult,
    __version__,
    compare_models,
    gate_level_run,
    husimi_snapshots,
    run_ensemble,
    run_single,
    scan_phase_diagram,
)
from .statevector import (
    QuantumState,
    apply_gate,
    apply_xx_rotation,
    apply_z_phase,
    inner_product,
    new_uniform_state,
)
from .theory import (
    EffectiveHamiltonian4,
    TheoryParams,
    build_h_eff,
    epsilon_critical,
    fit_kick_factor,
    mean_w_g_theory,
    operations_budget,
    renormalized_frequency,
    sigma_width,
    single_kick_run,
    two_level_w_g,
)
