"""Stationary market weights of rank-based diffusions and their large-n limits."""

from .asymptotics import EtaParam, limit_dp, limit_entropy, max_weight_moment, psi
from .errors import ConditionViolated, DomainError, InvalidBeta, ModelMismatch, RankDiffError
from .pd import (PDConfig, empirical_weight_statistics, sample_pd, sample_pd_ppp,
                 sample_pd_stickbreaking, sample_pd_via_ordered_exponentials)
from .sde import ParticleState, SimConfig, run_ensemble, run_to_stationarity, step
from .stationary import (sample_stationary_spacings, sample_stationary_weights,
                         stationary_weight_matrix, weights_from_spacings)
from .types import (DriftSpec, PointSequence, SpacingSample, WeightSequence, alpha_vector, atlas,
                    check_stationarity_condition, gravity, metric_d, metric_dprime, top_push, two_block)

__version__ = "0.1.0"
