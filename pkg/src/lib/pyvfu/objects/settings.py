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
Data structures for execution settings.

There are two levels of settings. 'VflConfig' holds the protocol and
optimisation hyperparameters needed by the library. 'Settings' holds
everything needed for a full experiment (dataset, unlearning request,
audit and output files) and derives a 'VflConfig' from it.
"""

import logging
from pathlib import Path

from commonlibs.fileio.paths import ProjectPaths
from schemadict import schemadict

from pyvfu.objects.errors import ConfigError
from pyvfu.objects.utils import check_dict, get_default_dict

logger = logging.getLogger(__name__)

UPDATE_RULES = ('sgd', 'newton')
MODES = (
    'train', 'unlearn-party', 'unlearn-feature', 'unlearn-sample',
    'retrain', 'audit', 'ablation', 'compare'
)
UNLEARN_MODES = ('unlearn-party', 'unlearn-feature', 'unlearn-sample', 'retrain', 'audit')
FEATURE_SELECTORS = ('most', 'least')
METRICS = ('f1', 'auc')

SCHEMA_RATE = {'type': float, '>': 0.0}
SCHEMA_RATE_ZERO = {'type': float, '>=': 0.0}
SCHEMA_COUNT = {'type': int, '>=': 1}
SCHEMA_COUNT_ZERO = {'type': int, '>=': 0}

DEFAULT_VFL_CONFIG = {
    'parties': (3, int),
    'epochs': (50, int),
    'batch_size': (512, int),
    'lr_active': (1e-2, float),
    'lr_passive': (1e-2, float),
    'alpha': (0.3, float),
    'lambda': (1e-3, float),
    'u_ep': (5, int),
    'distill_epochs': (None, (None, int)),
    'update_rule': ('sgd', str),
    'damping': (1e-3, float),
    'seed': (0, int),
    'passive_hidden': (8, int),
    'embedding_dim': (8, int),
    'active_hidden': (32, int),
    'keep_last_epochs': (0, int),
    'max_workers': (1, int),
    'active_owns_features': (True, bool),
}

VFL_CONFIG_SCHEMA = schemadict({
    'parties': SCHEMA_COUNT,
    'epochs': SCHEMA_COUNT_ZERO,
    'batch_size': SCHEMA_COUNT,
    'lr_active': SCHEMA_RATE_ZERO,
    'lr_passive': SCHEMA_RATE_ZERO,
    'alpha': {'type': float, '>=': 0.0, '<=': 1.0},
    'lambda': SCHEMA_RATE,
    'u_ep': SCHEMA_COUNT,
    'distill_epochs': SCHEMA_COUNT,
    'damping': SCHEMA_RATE_ZERO,
    'passive_hidden': SCHEMA_COUNT_ZERO,
    'embedding_dim': SCHEMA_COUNT,
    'active_hidden': SCHEMA_COUNT_ZERO,
    'keep_last_epochs': SCHEMA_COUNT_ZERO,
    'max_workers': SCHEMA_COUNT,
})

DEFAULT_SETTINGS = {
    **DEFAULT_VFL_CONFIG,
    'mode': ('train', str),
    'dataset': ('synthetic', str),
    'label_col': (None, (None, str)),
    'id_col': (None, (None, str)),
    'synthetic_n': (2000, int),
    'synthetic_d': (12, int),
    'synthetic_classes': (2, int),
    'synthetic_informative': (None, (None, int)),
    'test_fraction': (0.2, float),
    'unlearn_at': (25, int),
    'target_party': (None, (None, str)),
    'target_features': (None, (None, list, str)),
    'target_batches': (None, (None, list)),
    'target_samples': (None, (None, list)),
    'mia_epochs': (10, int),
    'mia_hidden': (32, int),
    'mia_lr': (1e-2, float),
    'mia_start_epoch': (10, int),
    'ablation_metric': ('f1', str),
    'repeats': (1, int),
    'store_path': (None, (None, str)),
    'output_dir': ('pyvfu_output', str),
    'method_csv': (None, (None, str)),
    'benchmark_csv': (None, (None, str)),
    'tolerance': (0.05, float),
}

SETTINGS_SCHEMA = schemadict({
    **VFL_CONFIG_SCHEMA,
    'lr_active': SCHEMA_RATE,
    'lr_passive': SCHEMA_RATE,
    'epochs': SCHEMA_COUNT,
    'synthetic_n': {'type': int, '>=': 2},
    'synthetic_d': SCHEMA_COUNT,
    'synthetic_classes': SCHEMA_COUNT,
    'synthetic_informative': SCHEMA_COUNT,
    'test_fraction': SCHEMA_RATE,
    'unlearn_at': SCHEMA_COUNT_ZERO,
    'mia_epochs': SCHEMA_COUNT,
    'mia_hidden': SCHEMA_COUNT,
    'mia_lr': SCHEMA_RATE,
    'mia_start_epoch': SCHEMA_COUNT_ZERO,
    'repeats': SCHEMA_COUNT,
    'tolerance': SCHEMA_RATE_ZERO,
})


class PATHS:
    """
    Namespace for project paths
    """

    class DIR:
        RUN = 'run_{counter:03d}'

    class FILES:
        LOG = 'log.txt'
        METRICS_METHOD = 'metrics_method.csv'
        METRICS_BENCHMARK = 'metrics_benchmark.csv'
        METRICS_METHOD_MEAN = 'metrics_method_mean.csv'
        METRICS_BENCHMARK_MEAN = 'metrics_benchmark_mean.csv'
        SUMMARY = 'summary.json'
        STORE = 'embeddings.vfus'
        ABLATION = 'ablation.csv'
        COMPARISON = 'comparison.json'


def _coerce_floats(template_dict, settings_dict):
    """Accept integers where the template expects a float"""

    for key, (_, dtype) in template_dict.items():
        value = settings_dict.get(key)
        if dtype is float and isinstance(value, int) and not isinstance(value, bool):
            settings_dict[key] = float(value)


def validate(template_dict, schema, settings_dict):
    """
    Check a settings dictionary against a template and a schema

    Raises:
        :ConfigError: Naming the first offending key
    """

    try:
        check_dict(template_dict, settings_dict)
    except (KeyError, TypeError) as err:
        raise ConfigError(str(err).strip('"'))

    for key, rule in schema.items():
        value = settings_dict.get(key)
        if value is None:
            continue
        try:
            schemadict({key: rule}).validate({key: value})
        except (TypeError, ValueError, KeyError) as err:
            raise ConfigError(f"Invalid value for '{key}': {value!r} ({err})")

    if settings_dict['update_rule'] not in UPDATE_RULES:
        raise ConfigError(f"Invalid value for 'update_rule': use one of {UPDATE_RULES}")


class VflConfig:

    def __init__(self, **kwargs):
        """
        Protocol and optimisation hyperparameters

        Attributes are named as the keys of 'DEFAULT_VFL_CONFIG', except for
        'lambda' which is available as 'lam'.

        Raises:
            :ConfigError: If a value is missing its type or range
        """

        config = get_default_dict(DEFAULT_VFL_CONFIG)
        config.update(kwargs)
        _coerce_floats(DEFAULT_VFL_CONFIG, config)
        validate(DEFAULT_VFL_CONFIG, VFL_CONFIG_SCHEMA, config)
        self._config = config

    def __getattr__(self, name):
        if name == 'lam':
            name = 'lambda'
        try:
            return self.__dict__['_config'][name]
        except KeyError:
            raise AttributeError(name)

    def __repr__(self):
        return f"{self.__class__.__name__}({self._config})"

    def as_dict(self):
        return dict(self._config)

    def replace(self, **kwargs):
        """Return a copy with some values changed"""

        config = self.as_dict()
        config.update(kwargs)
        return VflConfig(**config)


class Settings:

    def __init__(self, settings_dict=None, *, make_dirs=False):
        """
        Data structure with PyVFU experiment settings

        Attributes:
            :settings: (dict) Validated settings (see 'DEFAULT_SETTINGS')
            :project_dir: (Path) Output directory
            :paths: (obj) 'ProjectPaths' for all output files
        """

        self.settings = get_default_dict(template_dict=DEFAULT_SETTINGS)
        if settings_dict is not None:
            self.update_from_dict(settings_dict)
        else:
            self._check_settings_dict()

        self.project_dir = Path(self.settings['output_dir']).resolve()
        self.paths = None
        self.generate_paths()

        if make_dirs:
            self.paths.make_dirs_for_groups('dir')

    def __getitem__(self, key):
        return self.settings[key]

    def generate_paths(self):
        """
        Initialise the file structure

        With several repeats every seed writes to its own 'run_XXX'
        directory, selected by the 'counter' of the project paths.
        """

        run_dir = PATHS.DIR.RUN if self.settings['repeats'] > 1 else '.'

        self.paths = ProjectPaths(self.project_dir)
        self.paths.add_path(uid='d_root', path='.', uid_groups='dir')
        self.paths.add_path(uid='d_run', path=run_dir, uid_groups='dir')

        self.paths.add_path(uid='f_log', path=PATHS.FILES.LOG)
        self.paths.add_path(uid='f_metrics_method_mean', path=PATHS.FILES.METRICS_METHOD_MEAN)
        self.paths.add_path(uid='f_metrics_benchmark_mean', path=PATHS.FILES.METRICS_BENCHMARK_MEAN)
        self.paths.add_path(uid='f_comparison', path=PATHS.FILES.COMPARISON)

        self.paths.add_subpath(uid_parent='d_run', uid='f_metrics_method', path=PATHS.FILES.METRICS_METHOD)
        self.paths.add_subpath(uid_parent='d_run', uid='f_metrics_benchmark', path=PATHS.FILES.METRICS_BENCHMARK)
        self.paths.add_subpath(uid_parent='d_run', uid='f_summary', path=PATHS.FILES.SUMMARY)
        self.paths.add_subpath(uid_parent='d_run', uid='f_ablation', path=PATHS.FILES.ABLATION)

        if self.settings['store_path'] is not None:
            self.paths.add_path(uid='f_store', path=Path(self.settings['store_path']).resolve())
        else:
            self.paths.add_subpath(uid_parent='d_run', uid='f_store', path=PATHS.FILES.STORE)

    def update_from_dict(self, settings_dict):
        """
        Update settings from a dictionary

        Args:
            :settings_dict: (dict) Settings to overwrite

        Raises:
            :ConfigError: If a key is unknown or a value is invalid
        """

        for key, value in settings_dict.items():
            if key not in DEFAULT_SETTINGS:
                raise ConfigError(f"Unknown setting '{key}'")
            self.settings[key] = value
        self._check_settings_dict()

    def vfl_config(self, **overrides):
        """Return the library hyperparameters of these settings"""

        config = {key: self.settings[key] for key in DEFAULT_VFL_CONFIG}
        config.update(overrides)
        return VflConfig(**config)

    def clean(self):
        """
        Remove old run directories
        """

        for counter in range(self.settings['repeats']):
            self.paths.counter = counter
            run_dir = self.paths('d_run')
            if run_dir != self.project_dir and run_dir.exists():
                for child in run_dir.iterdir():
                    child.unlink()
                run_dir.rmdir()
        self.paths.counter = 0

    def _check_settings_dict(self):
        """
        Check that settings dictionary contains valid input arguments
        """

        logger.debug("Checking settings...")
        _coerce_floats(DEFAULT_SETTINGS, self.settings)
        validate(DEFAULT_SETTINGS, SETTINGS_SCHEMA, self.settings)

        mode = self.settings['mode']
        if mode not in MODES:
            raise ConfigError(f"Invalid value for 'mode': '{mode}', use one of {MODES}")
        if self.settings['test_fraction'] >= 1.0:
            raise ConfigError("Invalid value for 'test_fraction': expected a fraction below 1")
        if self.settings['ablation_metric'] not in METRICS:
            raise ConfigError(f"Invalid value for 'ablation_metric': use one of {METRICS}")

        target_features = self.settings['target_features']
        if isinstance(target_features, str) and target_features not in FEATURE_SELECTORS:
            raise ConfigError(
                f"Invalid value for 'target_features': '{target_features}', "
                f"use a list of indices or one of {FEATURE_SELECTORS}"
            )

        for key in ('target_features', 'target_batches', 'target_samples'):
            value = self.settings[key]
            if isinstance(value, list) and not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
                raise ConfigError(f"Invalid value for '{key}': expected a list of integers")

        if mode in ('unlearn-party', 'unlearn-feature') and self.settings['target_party'] is None:
            raise ConfigError(f"Mode '{mode}' requires 'target_party'")
        if mode == 'unlearn-feature' and not target_features:
            raise ConfigError(f"Mode '{mode}' requires 'target_features'")
        if mode == 'unlearn-sample' and not (self.settings['target_batches'] or self.settings['target_samples']):
            raise ConfigError(f"Mode '{mode}' requires 'target_batches' or 'target_samples'")
        if mode == 'audit' and not self.has_request:
            raise ConfigError(f"Mode '{mode}' requires 'target_party', 'target_batches' or 'target_samples'")
        if mode == 'compare' and not (self.settings['method_csv'] and self.settings['benchmark_csv']):
            raise ConfigError(f"Mode '{mode}' requires 'method_csv' and 'benchmark_csv'")

        if mode in UNLEARN_MODES and self.has_request:
            unlearn_at, epochs = self.settings['unlearn_at'], self.settings['epochs']
            if not 0 < unlearn_at < epochs:
                raise ConfigError(
                    f"Invalid value for 'unlearn_at': {unlearn_at}, expected 0 < unlearn_at < epochs ({epochs})"
                )

    @property
    def has_request(self):
        return any(self.settings[key] not in (None, [], '') for key in
                   ('target_party', 'target_features', 'target_batches', 'target_samples'))
