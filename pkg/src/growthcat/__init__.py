"""Exact simulation and analysis of growth processes with catastrophes.

A state grows along ``dx/dt = alpha(x)`` and jumps down at rate ``beta(x)``
to a point drawn from the kernel ``H(x, .)`` on ``[0, x]``.
"""
from .analysis import (analytic_curve, classify, embedded_invariant, excursion_height_cdf,
                       exit_prob_up, expected_return_time, return_time_at_zero, scale_s,
                       speed_density)
from .embedded import down_move_prob, embedded_cdf, run_chain, sample_embedded_step
from .flow import boundary_integrals, flow_at, time_to_reach
from .hazard import expected_jump_time, gamma_big, sample_jump_time, survival
from .kernel import disaster_prob, kernel_cdf, sample_after_jump
from .model import ModelError, ModelSpec, fixture_names, load_model, validate
from .montecarlo import atom_mass_check, estimate, occupation_vs_speed, verify
from .simulate import Status, StopRule, first_exit, simulate_path
from .streams import stream

__version__ = "0.1.0"
