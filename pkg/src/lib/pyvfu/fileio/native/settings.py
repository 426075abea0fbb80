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
Functions for reading and writing of PyVFU configuration files.

A configuration file contains one 'key = value' pair per line. Lines
starting with '#' and blank lines are ignored. Values are parsed according
to the type of the setting::

    # Main experiment
    mode = unlearn-party
    target_party = A
    epochs = 50
    target_batches = 0, 1, 2
"""

import logging
from pathlib import Path

from commonlibs.logger import truncate_filepath

from pyvfu.fileio.utils import atomic_write
from pyvfu.objects.errors import ConfigError
from pyvfu.objects.settings import DEFAULT_SETTINGS, FEATURE_SELECTORS

logger = logging.getLogger(__name__)

TRUE_WORDS = ('true', 'yes', '1')
FALSE_WORDS = ('false', 'no', '0')


def _as_tuple(dtype):
    return dtype if isinstance(dtype, tuple) else (dtype,)


def parse_value(key, text):
    """
    Convert a string into the type of a setting

    Args:
        :key: (str) Setting name
        :text: (str) Value as written in a file or on the command line

    Returns:
        :value: Parsed value

    Raises:
        :ConfigError: If the key is unknown or the value cannot be parsed
    """

    if key not in DEFAULT_SETTINGS:
        raise ConfigError(f"Unknown setting '{key}'")

    dtypes = _as_tuple(DEFAULT_SETTINGS[key][1])
    text = str(text).strip()

    if None in dtypes and text.lower() in ('none', ''):
        return None

    try:
        if bool in dtypes:
            if text.lower() in TRUE_WORDS:
                return True
            if text.lower() in FALSE_WORDS:
                return False
            raise ValueError("expected true or false")
        if list in dtypes:
            if str in dtypes and text.lower() in FEATURE_SELECTORS:
                return text.lower()
            return [int(item) for item in text.split(',') if item.strip()]
        if int in dtypes:
            return int(text)
        if float in dtypes:
            return float(text)
    except ValueError as err:
        raise ConfigError(f"Invalid value for '{key}': '{text}' ({err})")
    return text


def format_value(value):
    """String written to a configuration file for a setting value"""

    if value is None:
        return 'none'
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, list):
        return ', '.join(str(item) for item in value)
    return str(value)


def load(config_filepath):
    """
    Read settings from a configuration file

    Args:
        :config_filepath: (str, Path) Configuration file

    Returns:
        :settings_dict: (dict) Parsed settings (only the keys found in the file)

    Raises:
        :ConfigError: If the file is missing, or a line or value is invalid
    """

    config_filepath = Path(config_filepath)
    if not config_filepath.is_file():
        raise ConfigError(f"Configuration file '{config_filepath}' not found")

    logger.info(f"Reading configuration from '{truncate_filepath(config_filepath)}'...")

    settings_dict = {}
    with open(config_filepath, 'r') as fp:
        for line_number, line in enumerate(fp, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            if '=' not in line:
                raise ConfigError(f"Line {line_number} of '{config_filepath.name}' is not a 'key = value' pair")
            key, text = (part.strip() for part in line.split('=', 1))
            settings_dict[key] = parse_value(key, text)
    return settings_dict


def save(settings, config_filepath):
    """
    Write settings to a configuration file

    Args:
        :settings: (obj) 'Settings'
        :config_filepath: (str, Path) Target file
    """

    logger.info(f"Saving configuration to '{truncate_filepath(config_filepath)}'...")
    with atomic_write(config_filepath) as fp:
        for key in sorted(settings.settings):
            fp.write(f"{key} = {format_value(settings.settings[key])}\n")
