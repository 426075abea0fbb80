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

import importlib.util
from pathlib import Path

from pytest import raises

import pyvfu.fileio.native.results as results
from pyvfu.objects.reports import MetricsRecord

EXE = Path(__file__).parents[3]/'src'/'bin'/'_pyvfu_exe.py'


def load_cli():
    spec = importlib.util.spec_from_file_location('_pyvfu_exe', EXE)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


cli = load_cli()


def small_run(tmp_path, *args):
    return cli.main(['--epochs', '2', '--batch-size', '64', '--out', str(tmp_path/'out'), '-q', *args])


def test_train(tmp_path):
    assert small_run(tmp_path) == cli.EXIT_OK
    assert len(results.load_metrics(tmp_path/'out'/'metrics_method.csv')) == 2
    assert (tmp_path/'out'/'log.txt').is_file()


def test_config_file(tmp_path):
    config = tmp_path/'run.cfg'
    config.write_text("# short run\nepochs = 5\nlambda = 0.01\n")
    assert small_run(tmp_path, '--config', str(config), '--lambda', '0.02') == cli.EXIT_OK
    assert len(results.load_metrics(tmp_path/'out'/'metrics_method.csv')) == 2


def test_configuration_errors(tmp_path):
    assert small_run(tmp_path, '--mode', 'bogus') == cli.EXIT_CONFIG_ERROR
    assert small_run(tmp_path, '--seed', 'x') == cli.EXIT_CONFIG_ERROR
    assert small_run(tmp_path, '--mode', 'unlearn-party') == cli.EXIT_CONFIG_ERROR
    assert small_run(tmp_path, '--config', str(tmp_path/'missing.cfg')) == cli.EXIT_CONFIG_ERROR

    data = tmp_path/'data.csv'
    data.write_text("a,b,label\n1,2,x\n3,4,y\n")
    assert small_run(tmp_path, '--dataset', str(data)) == cli.EXIT_CONFIG_ERROR

    with raises(SystemExit) as exc_info:
        small_run(tmp_path, '--no-such-flag')
    assert exc_info.value.code == cli.EXIT_CONFIG_ERROR


def test_runtime_errors(tmp_path):
    data = tmp_path/'data.csv'
    data.write_text("a,b,label\n1,2,x\n3,oops,y\n")
    assert small_run(tmp_path, '--dataset', str(data), '--label-col', 'label') == cli.EXIT_RUNTIME_ERROR
    assert small_run(tmp_path, '--dataset', str(tmp_path/'missing.csv'), '--label-col', 'label') == cli.EXIT_RUNTIME_ERROR


def test_compare(tmp_path):
    method = [MetricsRecord(1, 'train', 0.5, 0.4, 0.91, 0.95)]
    benchmark = [MetricsRecord(1, 'train', 0.5, 0.4, 0.88, 0.95)]
    results.save_metrics(method, tmp_path/'method.csv')
    results.save_metrics(benchmark, tmp_path/'benchmark.csv')

    args = ['--mode', 'compare', '--method-csv', str(tmp_path/'method.csv'),
            '--benchmark-csv', str(tmp_path/'benchmark.csv')]
    assert small_run(tmp_path, *args, '--tolerance', '0.05') == cli.EXIT_OK
    assert small_run(tmp_path, *args, '--tolerance', '0.01') == cli.EXIT_RUNTIME_ERROR


def test_version():
    with raises(SystemExit) as exc_info:
        cli.main(['--version'])
    assert exc_info.value.code == 0
