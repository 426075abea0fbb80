#!/usr/bin/env python3
# -*- coding: utf-8 -*-

# ----------------------------------------------------------------------
# Copyright 2024 the PyVFU authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ----------------------------------------------------------------------

"""
Sample alignment and vertical partitioning of feature columns.
"""

from functools import reduce
import logging

import numpy as np

from pyvfu.objects.dataset import Dataset, VerticalSplit
from pyvfu.objects.errors import AlignmentError, SplitError

logger = logging.getLogger(__name__)


def align_samples(id_lists):
    """
    Return the sample IDs known to every party

    Args:
        :id_lists: (list) One list of sample IDs per party

    Returns:
        :ids: (numpy) Common IDs in ascending order

    Raises:
        :AlignmentError: If a list is empty or the intersection is empty
    """

    id_lists = [np.asarray(ids, dtype=np.int64).reshape(-1) for ids in id_lists]
    if not id_lists:
        raise AlignmentError("No sample ID lists given")
    for party, ids in enumerate(id_lists):
        if ids.size == 0:
            raise AlignmentError(f"Party {party} has no samples")

    common = reduce(np.intersect1d, id_lists)
    if common.size == 0:
        raise AlignmentError("Parties do not share any sample ID")

    logger.debug(f"Aligned {common.size} common samples across {len(id_lists)} parties")
    return common


def align_datasets(datasets):
    """Restrict every dataset to the common sample IDs, in ascending ID order"""

    common = align_samples([ds.sample_ids for ds in datasets])
    return [ds.subset(ds.rows_for_ids(common)) for ds in datasets]


def equal_split(num_features, num_parties):
    """
    Split feature columns into contiguous, (almost) equal blocks

    The first 'num_features % num_parties' parties get one extra column.

    Raises:
        :SplitError: If there are fewer features than parties
    """

    if num_parties < 1:
        raise SplitError("At least one party is required")
    if num_features < num_parties:
        raise SplitError(f"Cannot split {num_features} features among {num_parties} parties")

    base, extra = divmod(num_features, num_parties)
    assignments = []
    start = 0
    for party in range(num_parties):
        width = base + (1 if party < extra else 0)
        assignments.append(list(range(start, start + width)))
        start += width
    return VerticalSplit(assignments)


def vertical_partition(dataset, split, active_party=None):
    """
    Give each party its feature columns

    Args:
        :dataset: (obj) Full 'Dataset'
        :split: (obj) 'VerticalSplit'
        :active_party: (int) Party which keeps the labels (None: no party)

    Returns:
        :parts: (list) One 'Dataset' per party, same sample order

    Raises:
        :SplitError: If the split does not partition the columns
    """

    split.check(dataset.num_features)
    parts = []
    for party, columns in enumerate(split.assignments):
        parts.append(dataset.select_columns(columns, keep_labels=(party == active_party)))
    return parts


def concat_parts(parts, split=None):
    """
    Reassemble the full feature matrix from party datasets

    Args:
        :parts: (list) Party datasets (or matrices)
        :split: (obj) Optional 'VerticalSplit' placing columns at their global index

    Returns:
        :features: (numpy) Feature matrix
    """

    blocks = [p.features if isinstance(p, Dataset) else np.asarray(p, dtype=np.float64) for p in parts]
    stacked = np.hstack(blocks)
    if split is None:
        return stacked

    features = np.empty_like(stacked)
    features[:, split.order] = stacked
    return features
