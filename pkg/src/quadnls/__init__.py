"""Pseudospectral simulation and analysis of the coupled quadratic Schrodinger system

    i u_t + p u_xx - theta u + conj(u) v = 0
    i sigma v_t + q v_xx - alpha v + c u^2 = 0

on a periodic box: exact linear propagators, Strang / integrating-factor
time stepping, Duhamel-Picard iteration, Sobolev and Bourgain norms, and
the I-method (smoothing multiplier, modified energy, commutators).
"""

from .spectral import (ComplexField, SpectralGrid, apply_symbol, japanese_bracket, l2_norm,
                       make_grid, sobolev_norm)
from .model import (FieldPair, ModelParams, SobolevPair, conserved_mass, hamiltonian, mass,
                    nonlinear_rhs, region_contains, region_sample, resonance_lines, resonance_n1,
                    resonance_n2, stationary_wave)
from .evolve import (BlowUpError, EvolveConfig, Trajectory, gauss4_step, ifrk4_step,
                     linear_propagate, lipschitz_probe, run, strang_step)
from .duhamel import (CutoffSpec, PicardReport, TimeSampledPair, contraction_time_scale, cutoff,
                      duhamel_map, existence_time_scaling, picard_solve, psi)
from .imethod import (IMultiplier, IncrementReport, apply_I, commutator_n1, commutator_n2,
                      energy_derivative_check, increment_experiment, modified_energy,
                      multiplier_M, multiplier_m, regime_classify)
from .bourgain import (SpaceTimeField, SpaceTimeGrid, bilinear_ratio_n1, bilinear_ratio_n2,
                       make_spacetime_grid, probe, xsb_norm)
from .config import ConfigError, ExperimentConfig, parse_config, serialize_config
from .checkpoint import read_checkpoint, write_checkpoint
from .experiments import run_experiment

__version__ = "0.1.0"
