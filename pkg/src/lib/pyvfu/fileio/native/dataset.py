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
Reading of numeric CSV datasets.

The first row is the header. Categorical columns must be encoded as
numbers beforehand; only the label column may hold arbitrary values.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from commonlibs.logger import truncate_filepath

from pyvfu.data.synthetic import zscore
from pyvfu.objects.dataset import Dataset
from pyvfu.objects.errors import DatasetError, EmptyDatasetError

logger = logging.getLogger(__name__)


def _numeric_column(frame, column):
    """
    Convert a column of strings to float64

    Raises:
        :DatasetError: Naming the file row and the column of the first bad cell
    """

    values = pd.to_numeric(frame[column].str.strip(), errors='coerce')
    bad = values.isna()
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise DatasetError(
            f"Non-numeric value '{frame[column].iloc[row]}' in row {row + 2}, column '{column}'"
        )
    return values.to_numpy(dtype=np.float64)


def load_csv(filepath, label_column=None, id_column=None, normalise=True):
    """
    Read a dataset from a CSV file

    Args:
        :filepath: (str, Path) CSV file
        :label_column: (str) Name of the label column (None: unlabelled data)
        :id_column: (str) Name of an integer sample ID column (None: row number)
        :normalise: (bool) Z-score the feature columns

    Returns:
        :dataset: (obj) 'Dataset', labels mapped to 0..C-1 in order of first appearance

    Raises:
        :DatasetError: If the file is missing or cannot be parsed
        :EmptyDatasetError: If the file has no data rows
    """

    filepath = Path(filepath)
    if not filepath.is_file():
        raise DatasetError(f"Dataset file '{filepath}' not found")

    logger.info(f"Reading dataset '{truncate_filepath(filepath)}'...")
    try:
        frame = pd.read_csv(filepath, dtype=str, keep_default_na=False, encoding='utf-8')
    except pd.errors.EmptyDataError:
        raise EmptyDatasetError(f"Dataset file '{filepath}' is empty")
    except (pd.errors.ParserError, UnicodeDecodeError) as err:
        raise DatasetError(f"Cannot parse dataset file '{filepath}': {err}")

    if frame.shape[0] == 0:
        raise EmptyDatasetError(f"Dataset file '{filepath}' has no data rows")

    for column in (label_column, id_column):
        if column is not None and column not in frame.columns:
            raise DatasetError(f"Column '{column}' not found in '{filepath.name}'")

    labels = None
    if label_column is not None:
        labels, _ = pd.factorize(frame[label_column].str.strip())

    if id_column is not None:
        sample_ids = _numeric_column(frame, id_column)
        if not np.all(sample_ids == np.round(sample_ids)):
            raise DatasetError(f"Sample IDs in column '{id_column}' must be integers")
        sample_ids = sample_ids.astype(np.int64)
    else:
        sample_ids = np.arange(frame.shape[0], dtype=np.int64)

    feature_names = [c for c in frame.columns if c not in (label_column, id_column)]
    if not feature_names:
        raise DatasetError(f"Dataset file '{filepath}' has no feature columns")

    features = np.column_stack([_numeric_column(frame, c) for c in feature_names])
    if normalise:
        features = zscore(features, feature_names)

    dataset = Dataset(sample_ids, features, labels, feature_names)
    logger.info(
        f"Loaded {len(dataset)} samples with {dataset.num_features} features"
        + (f" and {dataset.num_classes} classes" if labels is not None else "")
    )
    return dataset
