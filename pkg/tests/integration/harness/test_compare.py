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

from pytest import approx, raises

import pyvfu.fileio.native.results as results
from pyvfu.objects.errors import ComparisonError
from pyvfu.objects.reports import MetricsRecord
from pyvfu.stdfun.compare import compare_records, compare_runs

METHOD = [
    MetricsRecord(1, 'train', 0.70, 0.60, 0.60, 0.70),
    MetricsRecord(2, 'unlearn', 0.50, 0.40, 0.80, 0.90),
    MetricsRecord(3, 'post_unlearn', 0.40, 0.30, 0.91, 0.95),
]


def test_identical_runs_pass():
    report = compare_records(METHOD, METHOD, 0.0)
    assert report.passed
    assert [c.metric for c in report.comparisons] == ['f1', 'auc', 'mean_train_loss', 'mean_test_loss']
    assert report['mean_test_loss'].method == approx(0.35)


def test_tolerance():
    benchmark = [r._replace(f1=0.88) if r.epoch == 3 else r for r in METHOD]
    report = compare_records(METHOD, benchmark, 0.05)
    assert report.passed
    assert report['f1'].delta == approx(0.03)

    report = compare_records(METHOD, benchmark, 0.01)
    assert not report.passed
    assert not report['f1'].passed
    assert report['auc'].passed
    assert report.to_dict()['metrics']['f1']['passed'] is False


def test_losses_use_epochs_after_unlearning():
    benchmark = [r._replace(train_loss=5.0) if r.epoch == 1 else r for r in METHOD]
    assert compare_records(METHOD, benchmark, 0.0).passed

    plain = [r._replace(phase='train') for r in METHOD]
    assert not compare_records(plain, [r._replace(phase='train') for r in benchmark], 0.0).passed


def test_undefined_auc():
    method = [r._replace(auc=float('nan')) for r in METHOD]
    assert compare_records(method, method, 0.0)['auc'].passed
    assert not compare_records(method, METHOD, 1.0)['auc'].passed


def test_errors():
    with raises(ComparisonError):
        compare_records(METHOD, METHOD[:2], 0.05)
    with raises(ComparisonError):
        compare_records(METHOD, METHOD, -0.1)
    with raises(ComparisonError):
        compare_records([], METHOD, 0.05)


def test_compare_runs(tmp_path):
    results.save_metrics(METHOD, tmp_path/'method.csv')
    results.save_metrics(METHOD, tmp_path/'benchmark.csv')
    assert compare_runs(tmp_path/'method.csv', tmp_path/'benchmark.csv', 0.0).passed

    with raises(ComparisonError):
        compare_runs(tmp_path/'method.csv', tmp_path/'missing.csv', 0.0)
