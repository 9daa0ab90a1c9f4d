"""phasekit: periodic orbits, phase response curves, and entrainment
sensitivity analysis for parameterized ODE oscillator models."""

from .entrainment import (CouplingFunction, EntrainmentSimulation, InputWaveform,
                          LockingReport, LockingRoot, coupling_function,
                          coupling_sensitivity, locking_points,
                          locking_sensitivity, simulate_entrainment)
from .errors import (AccuracyError, AlignmentError, BasinEscapeError, ConfigError,
                     ConvergenceError, DegenerateNormalizationError,
                     DegenerateSectionError, DivergenceError, ModelDomainError,
                     NearTangencyError, NoCrossingError, NonHyperbolicError,
                     PhasekitError, StiffnessError, UndefinedRelativeError)
from .model import (DerivativeBundle, ModelDefinition, ParameterVector,
                    derivatives, eval_f, eval_input_field, eval_output,
                    resolve_parameters)
from .models import GOODWIN, RADIAL, REGISTRY, VAN_DER_POL, get_model
from .odeint import (Trajectory, find_section_crossing, integrate,
                     integrate_variational, section_crossings)
from .orbit import (OrbitOptions, PeriodicOrbit, Section, find_periodic_orbit,
                    monodromy, orbit_point, resample)
from .prc import (FinitePrcSample, PhaseResponse, asymptotic_phase,
                  compute_finite_prc, compute_iprc, project_to_orbit, wrap_phase)
from .robustness import (RobustnessReport, RobustnessRow, dominant_characteristic,
                         measure, normalize, rank_and_partition)
from .sensitivity import (CMatrixField, FDOracle, OrbitSensitivity,
                          PrcSensitivity, SensitivityBundle, c_matrix_field,
                          compute_bundle, finite_difference_oracle,
                          orbit_sensitivity, prc_sensitivity,
                          relative_sensitivities)

__version__ = "0.1.0"
