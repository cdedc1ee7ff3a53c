"""strainsense: dispersive strain sensing with strain-coupled qubits.

Simulation and analysis toolkit for a sensing protocol in which mechanical
strain modulates a transmon's Josephson energy, turning a longitudinal
qubit–resonator coupling into a strain-dependent resonator displacement
read out by homodyne detection.

Layers, bottom up: `transmon` (charge-basis spectra and strain
susceptibility), `phase_space` (truncated Fock spaces and displacement
operators), `dynamics` (branch-resolved joint states and the conditional-
displacement evolution), `homodyne` (deterministic Gaussian measurement
records and the linear estimator), `metrology` (sensitivity chains,
quantum Fisher information, Cramér–Rao bounds), and the run layer
(`config`, `audit`, `sweeps`, `cli`).
"""

__version__ = "0.1.0"

from .config import RunConfig, config_hash, from_dict, load_config, preset_config
from .dynamics import (
    CouplingParams,
    JointState,
    QubitRegister,
    RamseyResult,
    all_zero_state,
    coupling_rate,
    evolve_joint,
    ghz_state,
    joint_moments,
    mean_x_shift_analytic,
    plus_state,
    product_state,
    ramsey_sequence,
)
from .errors import (
    ConfigError,
    CutoffError,
    DegenerateEstimatorError,
    ModelRangeError,
    RegimeError,
    ResourceGuardError,
    StateError,
    StepError,
    StrainSenseError,
    TruncationError,
    UnidentifiableParameterError,
)
from .homodyne import (
    EstimationResult,
    HomodyneModel,
    derive_seed,
    estimate_strain,
    per_root_hz,
    sample_shots,
)
from .metrology import (
    QfiResult,
    SensitivityReport,
    cramer_rao_bound,
    ghz_crb_closed_form,
    protocol_qfi,
    qfi_finite_difference,
    qfi_generator_variance,
    scaling_curves,
    sensitivity_ghz,
    sensitivity_report,
    sensitivity_single,
)
from .phase_space import (
    FockSpace,
    ResonatorState,
    coherent_state,
    conditional_displacement,
    displace,
    displacement_matrix,
    moments,
    overlap,
    quadrature_operators,
    required_cutoff,
    vacuum_state,
)
from .transmon import (
    SpectrumResult,
    TransmonParams,
    charge_spectrum_exact,
    frequency_approx,
    josephson_energy,
    qubit_frequency_nominal,
    strain_susceptibility,
)

__all__ = [
    "__version__",
    # configuration
    "RunConfig",
    "config_hash",
    "from_dict",
    "load_config",
    "preset_config",
    # transmon
    "SpectrumResult",
    "TransmonParams",
    "charge_spectrum_exact",
    "frequency_approx",
    "josephson_energy",
    "qubit_frequency_nominal",
    "strain_susceptibility",
    # phase space
    "FockSpace",
    "ResonatorState",
    "coherent_state",
    "conditional_displacement",
    "displace",
    "displacement_matrix",
    "moments",
    "overlap",
    "quadrature_operators",
    "required_cutoff",
    "vacuum_state",
    # dynamics
    "CouplingParams",
    "JointState",
    "QubitRegister",
    "RamseyResult",
    "all_zero_state",
    "coupling_rate",
    "evolve_joint",
    "ghz_state",
    "joint_moments",
    "mean_x_shift_analytic",
    "plus_state",
    "product_state",
    "ramsey_sequence",
    # homodyne
    "EstimationResult",
    "HomodyneModel",
    "derive_seed",
    "estimate_strain",
    "per_root_hz",
    "sample_shots",
    # metrology
    "QfiResult",
    "SensitivityReport",
    "cramer_rao_bound",
    "ghz_crb_closed_form",
    "protocol_qfi",
    "qfi_finite_difference",
    "qfi_generator_variance",
    "scaling_curves",
    "sensitivity_ghz",
    "sensitivity_report",
    "sensitivity_single",
    # errors
    "StrainSenseError",
    "ConfigError",
    "ModelRangeError",
    "RegimeError",
    "CutoffError",
    "TruncationError",
    "StepError",
    "StateError",
    "DegenerateEstimatorError",
    "UnidentifiableParameterError",
    "ResourceGuardError",
]
