"""
The data package prepares datasets for vertical federated learning:
alignment of sample IDs, vertical partitioning, batch plans, the
train/test split and synthetic datasets.
"""

from pyvfu.data.partition import align_samples, vertical_partition, equal_split, concat_parts
from pyvfu.data.batching import make_batch_plan, train_test_split
from pyvfu.data.synthetic import generate_synthetic, zscore
