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
Exceptions raised by PyVFU.

Each exception derives from the built-in exception which describes it
best, so that callers may catch either.
"""


class ShapeError(ValueError):
    """Raised if matrix dimensions do not match"""

    pass


class ModelStateError(RuntimeError):
    """Raised if a forward cache does not belong to the model"""

    pass


class SingularMatrixError(RuntimeError):
    """Raised if a damped Hessian cannot be inverted"""

    pass


class DatasetError(ValueError):
    """Raised if a dataset cannot be read or is ill-defined"""

    pass


class EmptyDatasetError(DatasetError):
    """Raised if an operation requires at least one sample"""

    pass


class AlignmentError(ValueError):
    """Raised if parties do not share any sample ID"""

    pass


class SplitError(ValueError):
    """Raised if a vertical split does not partition the feature columns"""

    pass


class ProtocolError(RuntimeError):
    """Raised if a party violates the VFL message protocol"""

    pass


class StorageError(IOError):
    """Raised if the embedding store cannot be read or written"""

    pass


class RequestError(ValueError):
    """Raised if an unlearning request is invalid"""

    pass


class ConfigError(ValueError):
    """Raised if a configuration value is invalid"""

    pass


class ComparisonError(ValueError):
    """Raised if two metric files cannot be compared"""

    pass


class UndefinedMetricError(ValueError):
    """Raised if a metric is undefined for the given labels"""

    pass
