"""Deterministic metapopulation SIR simulator with mobility coupling."""

from .analysis import (HomogeneousParams, SummaryMetrics, SweepResult, compare, final_size,
                       homogeneous_susceptible, homogeneous_time_of, reproduction_number,
                       summarize, sweep)
from .dynamics import (CompartmentState, EpidemicParams, IntegratorConfig, RecoveryMode,
                       Scheme, Trajectory, classical_sir, derivatives, seed_state, simulate,
                       step)
from .exceptions import (ConfigurationError, DivergenceError, DomainError, InputError,
                         ShapeError, StiffnessError)
from .network import (Location, MobilityNetwork, QuarantineIntervention, SeedStrategy,
                      SeedVariant, apply_quarantine, generate_random_network, in_strength,
                      out_strength, quarantined_locations, rank_by_strength, select_seed)
from . import io

__version__ = "0.1.0"
