"""
The audit package checks unlearning with a membership inference attack
on the active model's output probabilities, and ranks features by
ablation.
"""

from pyvfu.audit.mia import (
    MiaModel, build_mia_training_set, train_mia, mia_accuracy, split_probe_rows
)
from pyvfu.audit.ablation import AblationScore, feature_ablation
