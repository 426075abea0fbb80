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
Functions for writing and reading of PyVFU results.

Metrics are written as CSV with one row per epoch. Summaries are JSON.
Files are replaced atomically so that an interrupted run never leaves a
partially written row.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from commonlibs.logger import truncate_filepath

from pyvfu.fileio.utils import atomic_write, dump_pretty_json
from pyvfu.objects.errors import ComparisonError
from pyvfu.objects.reports import MetricsRecord

logger = logging.getLogger(__name__)

METRICS_COLUMNS = list(MetricsRecord._fields)
VALUE_COLUMNS = ['train_loss', 'test_loss', 'f1', 'auc', 'mia_accuracy']


def metrics_frame(records):
    """Table of metrics records (missing MIA accuracy as NaN)"""

    rows = [
        [r.epoch, r.phase, r.train_loss, r.test_loss, r.f1, r.auc,
         np.nan if r.mia_accuracy is None else r.mia_accuracy]
        for r in records
    ]
    frame = pd.DataFrame(rows, columns=METRICS_COLUMNS)
    frame['epoch'] = frame['epoch'].astype(np.int64)
    return frame


def save_metrics(records, filepath):
    """
    Write metrics records to a CSV file

    Header: epoch,phase,train_loss,test_loss,f1,auc,mia_accuracy

    Args:
        :records: (list) 'MetricsRecord' in epoch order
        :filepath: (str, Path) Target file
    """

    epochs = [r.epoch for r in records]
    if any(b <= a for a, b in zip(epochs[:-1], epochs[1:])):
        raise ValueError("Metrics records must have strictly increasing epochs")

    logger.info(f"Writing metrics to file '{truncate_filepath(filepath)}'")
    with atomic_write(filepath) as fp:
        metrics_frame(records).to_csv(fp, index=False, na_rep='', lineterminator='\n')


def load_metrics(filepath):
    """
    Read metrics records from a CSV file

    Raises:
        :ComparisonError: If the file is missing or lacks a column
    """

    filepath = Path(filepath)
    if not filepath.is_file():
        raise ComparisonError(f"Metrics file '{filepath}' not found")

    frame = pd.read_csv(filepath)
    missing = [c for c in METRICS_COLUMNS if c not in frame.columns]
    if missing:
        raise ComparisonError(f"Metrics file '{filepath.name}' lacks the columns {missing}")

    records = []
    for row in frame.itertuples(index=False):
        mia = None if pd.isna(row.mia_accuracy) else float(row.mia_accuracy)
        records.append(MetricsRecord(
            int(row.epoch), str(row.phase), float(row.train_loss), float(row.test_loss),
            float(row.f1), float(row.auc), mia
        ))
    return records


def save_mean_metrics(runs, filepath):
    """
    Write the per-epoch mean and sample standard deviation of several runs

    Args:
        :runs: (list) One list of 'MetricsRecord' per run
        :filepath: (str, Path) Target file
    """

    frame = pd.concat([metrics_frame(records) for records in runs], ignore_index=True)
    grouped = frame.groupby(['epoch', 'phase'], sort=False)
    summary = grouped[VALUE_COLUMNS].mean().add_suffix('_mean')
    summary = summary.join(grouped[VALUE_COLUMNS].std(ddof=1).add_suffix('_std'))
    summary.insert(0, 'runs', grouped.size())
    summary = summary.sort_index(level='epoch', sort_remaining=False).reset_index()

    logger.info(f"Writing mean metrics of {len(runs)} runs to file '{truncate_filepath(filepath)}'")
    with atomic_write(filepath) as fp:
        summary.to_csv(fp, index=False, na_rep='', lineterminator='\n')


def save_summary(summary, filepath):
    """
    Write a run summary as JSON

    Args:
        :summary: (dict) Summary, may contain numpy values
        :filepath: (str, Path) Target file
    """

    logger.info(f"Writing summary to file '{truncate_filepath(filepath)}'")
    with atomic_write(filepath) as fp:
        dump_pretty_json(summary, fp)


def save_ablation(score, filepath, feature_names=None):
    """
    Write feature ablation scores as CSV, most important feature first

    Args:
        :score: (obj) 'AblationScore'
        :filepath: (str, Path) Target file
        :feature_names: (list) Names of the global feature columns
    """

    ranked = score.ranked()
    frame = pd.DataFrame({
        'rank': np.arange(1, len(ranked) + 1),
        'feature': ranked,
        'name': [feature_names[f] if feature_names else f"x{f}" for f in ranked],
        'score': [score[f] for f in ranked],
    })

    logger.info(f"Writing {score.metric} ablation scores to file '{truncate_filepath(filepath)}'")
    with atomic_write(filepath) as fp:
        frame.to_csv(fp, index=False, lineterminator='\n')
