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
PyVFU standard functions

An experiment trains a federation up to the unlearning epoch, executes the
unlearning request, resumes training and compares the result with a
benchmark retrained from scratch without the unlearned content.
"""

import logging

import numpy as np
import commonlibs.logger as hlogger

from pyvfu.__version__ import __version__
from pyvfu.audit import build_mia_training_set, feature_ablation, mia_accuracy, split_probe_rows, train_mia
from pyvfu.data import equal_split, generate_synthetic, make_batch_plan, train_test_split, vertical_partition
from pyvfu.objects.errors import ConfigError
from pyvfu.objects.reports import (
    PHASE_POST, PHASE_TRAIN, PHASE_UNLEARN, REQUEST_FEATURES, REQUEST_PARTY, REQUEST_SAMPLES, UnlearnRequest
)
from pyvfu.objects.settings import FEATURE_SELECTORS, Settings
from pyvfu.objects.vfl_struct import parse_party
from pyvfu.stdfun.compare import compare_records, compare_runs
from pyvfu.unlearn import retrain_benchmark, unlearn_features, unlearn_party, unlearn_samples
from pyvfu.vfl import build_federation, evaluate, probe_logits, train_vfl
import pyvfu.fileio as io

logger = logging.getLogger(__name__)
__prog_name__ = 'pyvfu'

PROBE = 'probe'
MIA_TEST_FRACTION = 0.2


class StdRunArgs:
    """
    Arguments used in 'standard_run'

    Attributes:
        :config: path of the configuration file (or None)
        :overrides: settings given on the command line
        :clean: boolean flag, remove old run directories first
        :verbose: boolean flag, true for verbose logger setting
        :debug: boolean flag, true for debug logger setting
        :quiet: boolean flag, true for quiet logger setting
    """

    def __init__(self, config=None, overrides=None, clean=False, verbose=False, debug=False, quiet=False):
        self.config = config
        self.overrides = {} if overrides is None else overrides
        self.clean = clean
        self.verbose = verbose
        self.debug = debug
        self.quiet = quiet


def get_settings(config_filepath=None, overrides=None, make_dirs=True):
    """
    Read settings from file, apply overrides and return a settings instance
    """

    settings_dict = {} if config_filepath is None else io.native.settings.load(config_filepath)
    settings_dict.update(overrides or {})
    return Settings(settings_dict, make_dirs=make_dirs)


def load_dataset(settings):
    """
    Return the full dataset of an experiment (CSV file or synthetic)
    """

    if settings['dataset'] == 'synthetic':
        logger.info("Generating synthetic dataset...")
        return generate_synthetic(
            settings['synthetic_n'], settings['synthetic_d'], settings['synthetic_classes'],
            settings['seed'], settings['synthetic_informative']
        )

    if settings['label_col'] is None:
        raise ConfigError("Setting 'label_col' is required for CSV datasets")
    return io.native.dataset.load_csv(settings['dataset'], settings['label_col'], settings['id_col'])


def planned_target_ids(settings, train, config):
    """
    Sample IDs of the target batches (of the batch plan of the unlearning
    epoch) and of the explicitly listed target samples
    """

    targets = set(int(s) for s in settings['target_samples'] or ())
    batches = settings['target_batches'] or ()
    if batches:
        plan = make_batch_plan(len(train), config.batch_size, settings['unlearn_at'], config.seed)
        for batch_index in batches:
            if not 0 <= batch_index < len(plan):
                raise ConfigError(
                    f"Invalid value for 'target_batches': batch {batch_index} does not exist, "
                    f"an epoch has {len(plan)} batches"
                )
            targets.update(int(s) for s in train.sample_ids[plan.batches[batch_index]])
    return sorted(targets)


def request_kind(settings):
    """Kind of unlearning request of a run (None without request)"""

    mode = settings['mode']
    kinds = {'unlearn-party': REQUEST_PARTY, 'unlearn-feature': REQUEST_FEATURES, 'unlearn-sample': REQUEST_SAMPLES}
    if mode in kinds:
        return kinds[mode]
    if mode not in ('retrain', 'audit') or not settings.has_request:
        return None
    if settings['target_features']:
        return REQUEST_FEATURES
    if settings['target_party'] is not None:
        return REQUEST_PARTY
    return REQUEST_SAMPLES


def make_request(settings, kind, target_ids=(), federation=None):
    """
    Build the unlearning request of a run

    Feature selectors ('most', 'least') are resolved by feature ablation of
    the target party on the trained 'federation'.
    """

    if kind is None:
        return None
    unlearn_at = settings['unlearn_at']

    if kind == REQUEST_SAMPLES:
        return UnlearnRequest.for_samples(sample_ids=target_ids, issued_at_epoch=unlearn_at)

    try:
        party = parse_party(settings['target_party'])
    except ValueError as err:
        raise ConfigError(f"Invalid value for 'target_party': {err}")

    if kind == REQUEST_PARTY:
        return UnlearnRequest.for_party(party, unlearn_at)

    features = settings['target_features']
    if features in FEATURE_SELECTORS:
        if federation is None:
            raise ConfigError(f"'target_features = {features}' can only be resolved in an unlearning mode")
        score = feature_ablation(federation, settings['ablation_metric'], party=party)
        features = score.select(1, features)
        logger.info(f"Selected feature {features} of party {settings['target_party']} by ablation")
    return UnlearnRequest.for_features(party, features, unlearn_at)


def run_unlearning(federation, request):
    """Execute a request with the matching unlearning engine"""

    if request.kind == REQUEST_PARTY:
        return unlearn_party(federation, request.party)
    if request.kind == REQUEST_FEATURES:
        return unlearn_features(federation, request.party, request.features)
    return unlearn_samples(federation, sample_ids=request.sample_ids)


def probe_sets(kind, train, split, target_ids):
    """
    Probe datasets whose logits are logged every epoch

    Sample audits probe the target samples, all other audits the test
    data of the federation.
    """

    if kind != REQUEST_SAMPLES:
        return {PROBE: None}
    targets = train.subset(train.rows_for_ids(target_ids))
    return {PROBE: dict(enumerate(vertical_partition(targets, split)))}


class MiaAudit:

    def __init__(self, settings, seed, present, absent, sort_probabilities):
        """
        Membership inference auditor trained at the unlearning epoch

        Args:
            :settings: (obj) 'Settings'
            :seed: (int) Seed of the run
            :present: (numpy) Probe logits of the model with the audited content
            :absent: (numpy) Probe logits of the benchmark without it
            :sort_probabilities: (bool) Audit sorted probability rows
        """

        self.train_rows, self.test_rows = split_probe_rows(len(present), MIA_TEST_FRACTION, seed)
        mia_set = build_mia_training_set(present[self.train_rows], absent[self.train_rows], seed, sort_probabilities)
        self.mia = train_mia(
            mia_set, epochs=settings['mia_epochs'], hidden=settings['mia_hidden'], lr=settings['mia_lr'],
            seed=seed, sort_probabilities=sort_probabilities
        )
        self.seed = seed
        self.present = present
        self.absent = absent

    def accuracy(self, method_logits, benchmark_logits):
        """Balanced accuracy on the held-out probes (method = 1, benchmark = 0)"""

        rows = self.test_rows
        logits = np.vstack([method_logits[rows], benchmark_logits[rows]])
        membership = np.concatenate([np.ones(rows.size), np.zeros(rows.size)])
        return mia_accuracy(self.mia, logits, membership)

    def chance(self):
        """Accuracy on all probes with shuffled membership labels"""

        logits = np.vstack([self.present, self.absent])
        membership = np.concatenate([np.ones(len(self.present)), np.zeros(len(self.absent))])
        shuffled = np.random.default_rng([self.seed, 7]).permutation(membership)
        return mia_accuracy(self.mia, logits, shuffled)


def run_single(settings, dataset, seed):
    """
    Run one seed of an experiment and write its files

    Returns:
        :result: (dict) Metrics records, summary and federations of the run
    """

    mode = settings['mode']
    config = settings.vfl_config(seed=seed)
    unlearn_at, epochs = settings['unlearn_at'], config.epochs

    train, test = train_test_split(dataset, settings['test_fraction'], seed)
    split = equal_split(train.num_features, config.parties)
    kind = request_kind(settings)
    target_ids = planned_target_ids(settings, train, config) if kind == REQUEST_SAMPLES else []
    probes = probe_sets(kind, train, split, target_ids) if kind is not None else None

    summary = {'program': f"{__prog_name__} {__version__}", 'mode': mode, 'seed': seed}
    result = {'summary': summary, 'method': None, 'benchmark': None}

    if mode == 'retrain':
        request = make_request(settings, kind, target_ids)
        benchmark, result['benchmark'] = retrain_benchmark(train, test, split, config, request, target_ids)
        io.native.results.save_metrics(result['benchmark'], settings.paths('f_metrics_benchmark'))
        io.native.store.save(benchmark.store, settings.paths('f_store'))
        summary['request'] = None if request is None else vars(request)
        summary['final'] = result['benchmark'][-1]._asdict()
        io.native.results.save_summary(summary, settings.paths('f_summary'))
        result['benchmark_federation'] = benchmark
        return result

    federation = build_federation(train, test, split, config)
    result['federation'] = federation

    if kind is None:
        records = train_vfl(federation)
        if mode == 'ablation':
            score = feature_ablation(federation, settings['ablation_metric'], party=_target_party(settings))
            io.native.results.save_ablation(score, settings.paths('f_ablation'), dataset.feature_names)
            summary['ablation'] = {'metric': score.metric, 'baseline': score.baseline, 'scores': dict(score.scores)}
            result['ablation'] = score
    else:
        records = train_vfl(federation, unlearn_at, probes=probes)
        request = make_request(settings, kind, target_ids, federation)
        summary['request'] = vars(request)
        present = federation.probe_log[(PROBE, unlearn_at)]

        if mode != 'audit':
            report = run_unlearning(federation, request)
            after = evaluate(federation)
            records[-1] = records[-1]._replace(
                phase=PHASE_UNLEARN, test_loss=after.loss, f1=after.f1, auc=after.auc
            )
            federation.probe_log[(PROBE, unlearn_at)] = probe_logits(federation, probes[PROBE])
            summary['report'] = report.to_dict()
            result['report'] = report

        phase = PHASE_TRAIN if mode == 'audit' else PHASE_POST
        records += train_vfl(federation, epochs - unlearn_at, phase=phase, probes=probes)

        benchmark, result['benchmark'] = retrain_benchmark(
            train, test, split, config, request, target_ids, probes=lambda _: probes
        )
        result['benchmark_federation'] = benchmark

        audit = MiaAudit(
            settings, seed, present, benchmark.probe_log[(PROBE, unlearn_at)],
            sort_probabilities=(kind != REQUEST_SAMPLES)
        )
        records = _with_mia_curve(records, federation, benchmark, audit, settings['mia_start_epoch'])
        summary['mia'] = {'before': audit.accuracy(present, audit.absent), 'chance': audit.chance()}
        if mode != 'audit':
            summary['mia']['after'] = audit.accuracy(federation.probe_log[(PROBE, unlearn_at)], audit.absent)
        summary['comparison'] = compare_records(records, result['benchmark'], settings['tolerance']).to_dict()
        io.native.results.save_metrics(result['benchmark'], settings.paths('f_metrics_benchmark'))

    result['method'] = records
    io.native.results.save_metrics(records, settings.paths('f_metrics_method'))
    io.native.store.save(federation.store, settings.paths('f_store'))

    summary['final'] = records[-1]._asdict()
    summary['messages'] = federation.bus.snapshot()
    summary['stored_records'] = len(federation.store)
    io.native.results.save_summary(summary, settings.paths('f_summary'))
    return result


def _target_party(settings):
    return None if settings['target_party'] is None else parse_party(settings['target_party'])


def _with_mia_curve(records, federation, benchmark, audit, start_epoch):
    """Fill in the MIA accuracy of every epoch from 'start_epoch' on"""

    curve = []
    for record in records:
        if record.epoch >= start_epoch:
            accuracy = audit.accuracy(
                federation.probe_log[(PROBE, record.epoch)], benchmark.probe_log[(PROBE, record.epoch)]
            )
            record = record._replace(mia_accuracy=accuracy)
        curve.append(record)
    return curve


def run_experiment(settings):
    """
    Run an experiment for every repeat seed

    Args:
        :settings: (obj) 'Settings'

    Returns:
        :results: (list) Result of every seed (see 'run_single()'), or the
            'ComparisonReport' in 'compare' mode
    """

    if settings['mode'] == 'compare':
        report = compare_runs(settings['method_csv'], settings['benchmark_csv'], settings['tolerance'])
        io.native.results.save_summary(report.to_dict(), settings.paths('f_comparison'))
        return report

    dataset = load_dataset(settings)
    results = []
    for counter in range(settings['repeats']):
        settings.paths.counter = counter
        settings.paths('d_run', make_dirs=True, is_dir=True)
        seed = settings['seed'] + counter
        logger.info(hlogger.decorate(f"Run {counter + 1}/{settings['repeats']} (seed {seed})"))
        results.append(run_single(settings, dataset, seed))
    settings.paths.counter = 0

    if settings['repeats'] > 1:
        for key, uid in (('method', 'f_metrics_method_mean'), ('benchmark', 'f_metrics_benchmark_mean')):
            if results[0][key] is not None:
                io.native.results.save_mean_metrics([r[key] for r in results], settings.paths(uid))
    return results


def clean_project_dir(settings):
    """
    Remove old files in project directory

    Args:
        :settings: settings instance
    """

    logger.info("Removing old files...")
    settings.clean()


def standard_run(args):
    """
    Run a standard experiment

    Args:
        :args: arguments (see StdRunArgs())

    Returns:
        :results: (list) See 'run_experiment()'
    """

    settings = get_settings(args.config, args.overrides)
    if args.clean:
        clean_project_dir(settings)
        settings.paths.make_dirs_for_groups('dir')

    hlogger.init(settings.paths('f_log'), level=args)
    logger = logging.getLogger(__name__)
    logger.info(hlogger.decorate(f"{__prog_name__} {__version__}"))

    results = run_experiment(settings)

    logger.info(f"{__prog_name__} {__version__} terminated")
    return results
