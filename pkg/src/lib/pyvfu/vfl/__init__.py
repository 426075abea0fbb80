"""
The vfl package assembles federations of parties and runs the VFL
training protocol (embeddings upstream, embedding gradients downstream).
"""

from pyvfu.vfl.federation import Federation, build_federation
from pyvfu.vfl.protocol import (
    train_vfl, train_epoch, active_batch_step, embedding_curvature, store_and_prune,
    evaluate, probe_logits
)
