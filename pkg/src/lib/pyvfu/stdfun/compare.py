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
Comparison of a method run with its retrain benchmark
"""

from collections import namedtuple
import logging

import numpy as np

from pyvfu.fileio.native.results import load_metrics
from pyvfu.objects.errors import ComparisonError
from pyvfu.objects.reports import PHASE_UNLEARN, PHASE_POST

logger = logging.getLogger(__name__)

MetricComparison = namedtuple('MetricComparison', ['metric', 'method', 'benchmark', 'delta', 'passed'])


class ComparisonReport:

    def __init__(self, comparisons, tolerance):
        """
        Pass/fail result of every compared metric

        Attributes:
            :comparisons: (list) 'MetricComparison'
            :tolerance: (float) Largest accepted absolute difference
        """

        self.comparisons = list(comparisons)
        self.tolerance = tolerance

    @property
    def passed(self):
        return all(c.passed for c in self.comparisons)

    def __getitem__(self, metric):
        for comparison in self.comparisons:
            if comparison.metric == metric:
                return comparison
        raise KeyError(metric)

    def to_dict(self):
        return {
            'tolerance': self.tolerance,
            'passed': self.passed,
            'metrics': {c.metric: c._asdict() for c in self.comparisons},
        }


def _compare(metric, method, benchmark, tolerance):
    if np.isnan(method) and np.isnan(benchmark):
        delta, passed = 0.0, True
    else:
        delta = abs(method - benchmark)
        passed = bool(delta <= tolerance)
    return MetricComparison(metric, float(method), float(benchmark), float(delta), passed)


def compare_records(method_records, benchmark_records, tolerance):
    """
    Compare terminal F1 and AUC and the mean losses after unlearning

    The losses are averaged over the unlearning epoch and the epochs after
    it. Without unlearning all epochs are used.

    Args:
        :method_records: (list) 'MetricsRecord' of the method run
        :benchmark_records: (list) 'MetricsRecord' of the benchmark run
        :tolerance: (float) Largest accepted absolute difference

    Returns:
        :report: (obj) 'ComparisonReport'

    Raises:
        :ComparisonError: If the benchmark lacks an epoch of the method run
    """

    if not method_records:
        raise ComparisonError("The method run has no epochs")
    if tolerance < 0:
        raise ComparisonError(f"Tolerance must not be negative, got {tolerance}")

    benchmark = {r.epoch: r for r in benchmark_records}
    epochs = [r.epoch for r in method_records if r.phase in (PHASE_UNLEARN, PHASE_POST)]
    if not epochs:
        epochs = [r.epoch for r in method_records]

    final_epoch = method_records[-1].epoch
    missing = sorted(set(epochs + [final_epoch]) - set(benchmark))
    if missing:
        raise ComparisonError(f"The benchmark run lacks the epochs {missing}")

    method = {r.epoch: r for r in method_records}
    comparisons = [
        _compare('f1', method[final_epoch].f1, benchmark[final_epoch].f1, tolerance),
        _compare('auc', method[final_epoch].auc, benchmark[final_epoch].auc, tolerance),
    ]
    for field in ('train_loss', 'test_loss'):
        comparisons.append(_compare(
            f"mean_{field}",
            np.mean([getattr(method[e], field) for e in epochs]),
            np.mean([getattr(benchmark[e], field) for e in epochs]),
            tolerance
        ))

    for c in comparisons:
        logger.info(
            f"{c.metric:>15s}: method {c.method:.5f} | benchmark {c.benchmark:.5f} "
            f"| delta {c.delta:.5f} | {'pass' if c.passed else 'FAIL'}"
        )
    return ComparisonReport(comparisons, tolerance)


def compare_runs(method_csv, benchmark_csv, tolerance):
    """
    Compare two metrics CSV files (see 'compare_records()')
    """

    return compare_records(load_metrics(method_csv), load_metrics(benchmark_csv), tolerance)
