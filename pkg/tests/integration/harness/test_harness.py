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

import json

import numpy as np
import pandas as pd

import pyvfu.fileio.native.results as results
import pyvfu.fileio.native.store as store_file
from pyvfu.objects.settings import Settings
from pyvfu.stdfun.run import run_experiment

# Desk scale experiment
SMALL = {
    'synthetic_n': 600,
    'epochs': 10,
    'unlearn_at': 5,
    'batch_size': 32,
    'lr_active': 0.1,
    'lr_passive': 0.1,
    'mia_start_epoch': 3,
}


def make_settings(output_dir, **kwargs):
    return Settings({**SMALL, 'output_dir': str(output_dir), **kwargs}, make_dirs=True)


def read_summary(settings):
    return json.loads(settings.paths('f_summary').read_text())


def test_train_mode(tmp_path):
    settings = make_settings(tmp_path)
    [result] = run_experiment(settings)

    records = results.load_metrics(settings.paths('f_metrics_method'))
    assert [r.epoch for r in records] == list(range(1, 11))
    assert all(r.phase == 'train' and r.mia_accuracy is None for r in records)
    assert not settings.paths('f_metrics_benchmark').exists()
    assert result['benchmark'] is None

    summary = read_summary(settings)
    assert summary['final']['epoch'] == 10
    assert summary['messages']['train'] == 10*15*3*2
    assert summary['stored_records'] == 10*15
    assert len(store_file.load(settings.paths('f_store'))) == 10*15


def test_unlearn_party_mode(tmp_path):
    settings = make_settings(tmp_path, mode='unlearn-party', target_party='A')
    run_experiment(settings)

    records = results.load_metrics(settings.paths('f_metrics_method'))
    assert [r.phase for r in records] == ['train']*4 + ['unlearn'] + ['post_unlearn']*5
    assert [r.mia_accuracy is None for r in records] == [True]*2 + [False]*8
    assert len(results.load_metrics(settings.paths('f_metrics_benchmark'))) == 10

    summary = read_summary(settings)
    assert summary['request']['party'] == 0
    assert summary['report']['messages_during_unlearn'] == 0
    assert set(summary['mia']) == {'before', 'after', 'chance'}
    assert set(summary['comparison']['metrics']) == {'f1', 'auc', 'mean_train_loss', 'mean_test_loss'}
    assert store_file.load(settings.paths('f_store')).width == 16


def test_deterministic(tmp_path):
    files = []
    for name in ('first', 'second'):
        settings = make_settings(tmp_path/name, mode='unlearn-party', target_party='B')
        run_experiment(settings)
        files.append([settings.paths(uid).read_bytes() for uid in
                      ('f_metrics_method', 'f_metrics_benchmark', 'f_store')])
    assert files[0] == files[1]


def test_party_unlearning_defeats_the_attack(tmp_path):
    settings = make_settings(
        tmp_path, mode='unlearn-party', target_party='A', synthetic_n=1000, synthetic_informative=4,
        epochs=20, unlearn_at=10, mia_start_epoch=10, mia_lr=0.05
    )
    run_experiment(settings)

    mia = read_summary(settings)['mia']
    assert mia['before'] >= 0.65
    assert mia['after'] <= mia['before'] - 0.15
    assert 0.4 <= mia['chance'] <= 0.6


def test_unlearn_feature_mode(tmp_path):
    settings = make_settings(tmp_path, mode='unlearn-feature', target_party='B', target_features='most')
    run_experiment(settings)

    features = read_summary(settings)['request']['features']
    assert len(features) == 1
    assert features[0] in (4, 5, 6, 7)


def test_unlearn_sample_mode(tmp_path):
    settings = make_settings(tmp_path, mode='unlearn-sample', target_batches=[0, 1])
    run_experiment(settings)

    summary = read_summary(settings)
    targets = summary['report']['extra']['target_ids']
    assert len(targets) == 64
    assert summary['request']['sample_ids'] == targets

    store = store_file.load(settings.paths('f_store'))
    assert not np.isin(store.sample_ids(), targets).any()
    assert len(store.sample_ids()) == 480 - 64


def test_audit_mode(tmp_path):
    settings = make_settings(tmp_path, mode='audit', target_party='A')
    run_experiment(settings)

    records = results.load_metrics(settings.paths('f_metrics_method'))
    assert all(r.phase == 'train' for r in records)
    summary = read_summary(settings)
    assert set(summary['mia']) == {'before', 'chance'}
    assert 'report' not in summary


def test_retrain_mode(tmp_path):
    settings = make_settings(tmp_path, mode='retrain', target_party='A')
    run_experiment(settings)

    assert not settings.paths('f_metrics_method').exists()
    assert len(results.load_metrics(settings.paths('f_metrics_benchmark'))) == 10
    assert store_file.load(settings.paths('f_store')).width == 16


def test_ablation_mode(tmp_path):
    settings = make_settings(tmp_path, mode='ablation', epochs=3)
    [result] = run_experiment(settings)

    frame = pd.read_csv(settings.paths('f_ablation'))
    assert len(frame) == 12
    assert list(frame['rank']) == list(range(1, 13))
    assert list(frame['feature']) == result['ablation'].ranked()


def test_repeats(tmp_path):
    settings = make_settings(tmp_path, epochs=2, repeats=2)
    runs = run_experiment(settings)
    assert [r['summary']['seed'] for r in runs] == [0, 1]

    for counter in (0, 1):
        settings.paths.counter = counter
        assert settings.paths('f_metrics_method').is_file()
    settings.paths.counter = 0

    frame = pd.read_csv(settings.paths('f_metrics_method_mean'))
    assert list(frame['epoch']) == [1, 2]
    assert list(frame['runs']) == [2, 2]
    assert not settings.paths('f_metrics_benchmark_mean').exists()


def test_compare_mode(tmp_path):
    settings = make_settings(tmp_path/'run', epochs=2)
    run_experiment(settings)
    method_csv = settings.paths('f_metrics_method')

    settings = make_settings(tmp_path, mode='compare', method_csv=str(method_csv),
                             benchmark_csv=str(method_csv), tolerance=0.0)
    report = run_experiment(settings)
    assert report.passed
    assert json.loads(settings.paths('f_comparison').read_text())['passed'] is True
