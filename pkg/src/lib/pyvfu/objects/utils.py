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
Helpers for template dictionaries.
"""


def check_dict(template_dict, test_dict):
    """
    Check that a test dictionary looks like a template dictionary

    Args:
        :template_dict: Template dictionary
        :test_dict: Test dictionary

    The template dictionary maps each key to a tuple with a default value
    and the accepted types:

    .. code:: python

        template_dict = {
            'epochs': (50, int),
            'target_party': (None, (None, str)),
        }

    A value of None is accepted if None is listed among the types. Booleans
    are not accepted where an integer or a float is expected.

    Raises:
        :KeyError: If the test dictionary has keys unknown to the template
        :TypeError: If types of test and template dictionary don't match
    """

    unknown = set(test_dict) - set(template_dict)
    if unknown:
        raise KeyError(f"Unknown key(s): {sorted(unknown)}")

    for key, (_, dtype) in template_dict.items():
        dtype = (dtype,) if not isinstance(dtype, tuple) else dtype
        value = test_dict[key]

        if value is None:
            if None in dtype:
                continue
            raise TypeError(f"Key '{key}' must not be None")

        types = tuple(t for t in dtype if t is not None)
        if isinstance(value, bool) and bool not in types:
            raise TypeError(f"Unexpected data type for key '{key}'. Expected {types}, got bool.")

        if not isinstance(value, types):
            raise TypeError(
                f"Unexpected data type for key '{key}'. "
                f"Expected {types}, got {type(value)}."
            )


def get_default_dict(template_dict):
    """
    Return a default dict from a template dictionary

    Args:
        :template_dict: Template dictionary

    Returns:
        :default_dict: New dictionary with defaults generated from 'template_dict'
    """

    default_dict = {}
    for key, (value, _) in template_dict.items():
        if isinstance(value, list):
            value = list(value)
        default_dict[key] = value
    return default_dict
