"""Ensemble Hamiltonian field dynamics on periodic grids.

One parameter B connects classical ensemble Hamilton-Jacobi dynamics (B = 0)
to quantum mechanics (B = hbar^2/8), with an independent linear-wave solver
for cross-validation.
"""
from .fields import (Constants, FieldState, InvalidDensityError, Metric, NodeError,
                     Wavefunction, fidelity, from_wavefunction, normalize,
                     to_wavefunction)
from .grids import ConfigurationError, GridSpec, derivative_backend
from .hamiltonian import (DerivativeCheckReport, HamiltonianModel, NumericsPolicy,
                          continuity_rhs, functional_derivative_check,
                          hamiltonian_density, hjb_rhs, quantum_potential,
                          total_hamiltonian)
from .potentials import (BarrierPotential, FreePotential, HarmonicPotential,
                         Potential, SampledPotential, make_potential)
from .evolution import (BlowUpError, RunParams, Trajectory, evolve_hydro,
                        evolve_reference, max_stable_dt, step_hydro, step_reference)
from .diagnostics import (ComparisonRecord, ObservableRecord, compare_states,
                          compare_with_reference, free_gaussian_width, observables,
                          observables_reference)
from .scenarios import (Scenario, coherent_state, gaussian_packet, preset_names,
                        preset_scenario)
from .axioms import (AxiomReport, check_galilean_boost, check_positivity,
                     check_scale_invariance, check_separability,
                     check_uniform_minimum, random_nodeless_state, run_axiom_suite)
from .config import RunConfig, default_dt, effective_config, parse_config

__all__ = [name for name in dir() if not name.startswith("_")]
