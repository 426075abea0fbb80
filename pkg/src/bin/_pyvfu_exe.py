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
Command line interface
"""

import argparse
import sys

from numpy.linalg import LinAlgError

from pyvfu.__version__ import __version__
from pyvfu.fileio.native.settings import parse_value
from pyvfu.objects.errors import ConfigError
from pyvfu.stdfun.compare import ComparisonReport
import pyvfu.stdfun.run as stdrun

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2

# Command line flag --> setting
FLAGS = {
    'mode': 'mode',
    'dataset': 'dataset',
    'label_col': 'label_col',
    'id_col': 'id_col',
    'parties': 'parties',
    'epochs': 'epochs',
    'unlearn_at': 'unlearn_at',
    'target_party': 'target_party',
    'target_features': 'target_features',
    'target_batches': 'target_batches',
    'target_samples': 'target_samples',
    'alpha': 'alpha',
    'lambda_': 'lambda',
    'u_ep': 'u_ep',
    'lr_active': 'lr_active',
    'lr_passive': 'lr_passive',
    'batch_size': 'batch_size',
    'seed': 'seed',
    'update_rule': 'update_rule',
    'repeats': 'repeats',
    'out': 'output_dir',
    'store_path': 'store_path',
    'method_csv': 'method_csv',
    'benchmark_csv': 'benchmark_csv',
    'tolerance': 'tolerance',
}


class ArgumentParser(argparse.ArgumentParser):
    """Argument parser which exits with the configuration error status"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG_ERROR, f"{self.prog}: error: {message}\n")


def get_parser():
    parser = ArgumentParser(prog=f'{stdrun.__prog_name__} {__version__}')
    parser.add_argument('--version', action='version', version=f'{stdrun.__prog_name__} {__version__}')
    parser.add_argument('--config', metavar='<config file>', help="configuration file ('key = value' lines)")

    group = parser.add_argument_group('experiment (override the configuration file)')
    group.add_argument('--mode', metavar='<mode>', help="train, unlearn-party, unlearn-feature, unlearn-sample, retrain, audit, ablation or compare")
    group.add_argument('--dataset', metavar='<path|synthetic>')
    group.add_argument('--label-col', metavar='<name>')
    group.add_argument('--id-col', metavar='<name>')
    group.add_argument('--parties', metavar='<K>')
    group.add_argument('--epochs', metavar='<T>')
    group.add_argument('--unlearn-at', metavar='<U>')
    group.add_argument('--target-party', metavar='<ID>')
    group.add_argument('--target-features', metavar='<i,j,k|most|least>')
    group.add_argument('--target-batches', metavar='<i,j,k>')
    group.add_argument('--target-samples', metavar='<i,j,k>')
    group.add_argument('--alpha', metavar='<float>')
    group.add_argument('--lambda', dest='lambda_', metavar='<float>')
    group.add_argument('--u-ep', metavar='<int>')
    group.add_argument('--lr-active', metavar='<float>')
    group.add_argument('--lr-passive', metavar='<float>')
    group.add_argument('--batch-size', metavar='<int>')
    group.add_argument('--seed', metavar='<int>')
    group.add_argument('--update-rule', metavar='<sgd|newton>')
    group.add_argument('--repeats', metavar='<N>')
    group.add_argument('--out', metavar='<dir>')
    group.add_argument('--store-path', metavar='<file>')
    group.add_argument('--method-csv', metavar='<file>')
    group.add_argument('--benchmark-csv', metavar='<file>')
    group.add_argument('--tolerance', metavar='<float>')

    group = parser.add_mutually_exclusive_group()
    group.add_argument('-v', '--verbose', action='store_true')
    group.add_argument('-d', '--debug', action='store_true')
    group.add_argument('-q', '--quiet', action='store_true')

    parser.add_argument("-c", "--clean", help="remove old run directories", action="store_true")
    return parser


def main(argv=None):
    """
    Command line interface

    Returns:
        :status: (int) 0 on success, 1 on configuration errors, 2 on runtime errors
    """

    args = get_parser().parse_args(argv)

    try:
        overrides = {
            key: parse_value(key, getattr(args, flag))
            for flag, key in FLAGS.items() if getattr(args, flag) is not None
        }
        results = stdrun.standard_run(stdrun.StdRunArgs(
            args.config, overrides, args.clean, args.verbose, args.debug, args.quiet
        ))
    except ConfigError as err:
        print(f"{stdrun.__prog_name__}: configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (ValueError, RuntimeError, OSError, KeyError, ArithmeticError, LinAlgError) as err:
        print(f"{stdrun.__prog_name__}: error: {err}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR

    if isinstance(results, ComparisonReport) and not results.passed:
        failed = [c.metric for c in results.comparisons if not c.passed]
        print(f"{stdrun.__prog_name__}: comparison failed for {failed}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
