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

from pytest import raises

import pyvfu.fileio.native.settings as config_file
from pyvfu.objects.errors import ConfigError
from pyvfu.objects.settings import Settings


def test_parse_value():
    assert config_file.parse_value('epochs', ' 12 ') == 12
    assert config_file.parse_value('lr_active', '0.5') == 0.5
    assert config_file.parse_value('target_batches', '0, 1,2') == [0, 1, 2]
    assert config_file.parse_value('target_features', 'Most') == 'most'
    assert config_file.parse_value('target_features', '3') == [3]
    assert config_file.parse_value('target_party', 'none') is None
    assert config_file.parse_value('target_party', 'A') == 'A'
    assert config_file.parse_value('active_owns_features', 'no') is False
    assert config_file.parse_value('mode', 'unlearn-party') == 'unlearn-party'


def test_invalid_values():
    with raises(ConfigError):
        config_file.parse_value('learning_rate', '0.1')
    with raises(ConfigError):
        config_file.parse_value('epochs', 'ten')
    with raises(ConfigError):
        config_file.parse_value('active_owns_features', 'maybe')
    with raises(ConfigError):
        config_file.parse_value('target_batches', '1, x')


def test_load(tmp_path):
    filepath = tmp_path/'run.cfg'
    filepath.write_text("# party run\n\nmode = unlearn-party\ntarget_party = B\nepochs = 20\n")
    assert config_file.load(filepath) == {'mode': 'unlearn-party', 'target_party': 'B', 'epochs': 20}

    filepath.write_text("mode unlearn-party\n")
    with raises(ConfigError, match='Line 1'):
        config_file.load(filepath)

    filepath.write_text("lr = 0.1\n")
    with raises(ConfigError):
        config_file.load(filepath)

    with raises(ConfigError):
        config_file.load(tmp_path/'missing.cfg')


def test_save_and_load(tmp_path):
    settings = Settings({'mode': 'unlearn-sample', 'target_batches': [0, 3], 'lr_active': 0.05,
                         'output_dir': str(tmp_path/'out')})
    filepath = tmp_path/'saved.cfg'
    config_file.save(settings, filepath)

    assert Settings(config_file.load(filepath)).settings == settings.settings
