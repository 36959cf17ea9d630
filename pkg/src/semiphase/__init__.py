"""Phase-space numerics for semiclassical Schrodinger dynamics.

Spectral grids, split-step quantum propagation, Wigner/Husimi
transforms, classical transport (trajectories, particle clouds,
semi-Lagrangian Liouville), rough-potential diagnostics, weak and L2
convergence metrics, and a reproducible experiment harness over eps
ladders.
"""
from ._version import __version__
from .classical import (ParticleCloud, SampledPath, TrajectoryBranch,
                        branch_constants, branch_family, branch_ode_residual,
                        integrate_hamiltonian, liouville_semi_lagrangian,
                        transport_particles)
from .errors import (ConfigurationError, NumericsError, RepresentationError,
                     SemiphaseError, ShapeMismatchError)
from .experiments import (EXPERIMENTS, ExperimentConfig, RunManifest,
                          defaults_for, resolve_experiment, run_experiment)
from .grids import (PhaseGrid, PositionGrid, build_position_grid, dft_forward,
                    dft_inverse, quadrature)
from .gridio import (read_checkpoint, read_grid, write_checkpoint, write_csv,
                     write_grid)
from .metrics import (RateFit, WeakMetricConfig, char_function, fit_rate,
                      l2_distance, weak_distance)
from .phasespace import (AtomicMeasure, GridDensity, build_wigner_grid, husimi,
                         l2_norm, marginals, restrict_p, sup_norm, upsample2,
                         wigner, wigner_ensemble)
from .potentials import (BVGradientReport, FourierConditionReport,
                         PotentialSpec, bv_gradient_diagnostic,
                         check_fourier_conditions, custom_potential, evaluate,
                         evaluate_at, gradient_at, harmonic_potential,
                         mollify, mollify_samples, rough_power_potential)
from .quantum import (DensityEnsemble, PropagatorConfig, WaveFunction,
                      checkpoint_state, h2_energy, load_state, propagate,
                      propagate_ensemble)
from .states import (ConcentratingProfile, RandomFamilySpec,
                     RealizedConcentration, check_epsn_operator_bound,
                     coherent_state, concentrating_wigner_data,
                     concentration_lattice, sample_random_family,
                     scaling_exponents)

__all__ = [name for name in dir() if not name.startswith("_")]
