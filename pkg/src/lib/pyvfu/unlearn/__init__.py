"""
The unlearn package contains the communication-free unlearning engines
(party and feature distillation, sample gradient ascent) and the retrain
from scratch benchmark.
"""

from pyvfu.unlearn.party_kd import unlearn_party_kd, unlearn_party
from pyvfu.unlearn.feature_kd import unlearn_features_kd, unlearn_features
from pyvfu.unlearn.samples_ga import unlearn_samples_ga, unlearn_samples, resolve_target_samples
from pyvfu.unlearn.benchmark import retrain_benchmark, exclude_from_data
