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
Utils for reading and writing files
"""

from contextlib import contextmanager
from functools import partial
import json
import os
from pathlib import Path

import numpy as np


class NDArrayEncoder(json.JSONEncoder):
    """
    Serialise numpy arrays and numpy scalars

    Use with: json.dump(obj, fp, cls=NDArrayEncoder)
    """

    def default(self, obj):
        if isinstance(obj, (np.ndarray, np.generic)):
            return obj.tolist()
        return json.JSONEncoder.default(self, obj)


# Dump pretty-formatted JSON with support for numpy arrays
dump_pretty_json = partial(json.dump, cls=NDArrayEncoder, indent=4, separators=(',', ': '))


@contextmanager
def atomic_write(filepath, mode='w'):
    """
    Open a temporary file which replaces 'filepath' once closed

    A failure while writing leaves an existing file untouched.

    Args:
        :filepath: (str, Path) Target file
        :mode: (str) 'w' or 'wb'
    """

    filepath = Path(filepath)
    filepath.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = filepath.with_name(f".{filepath.name}.tmp")
    try:
        with open(tmp_path, mode) as fp:
            yield fp
        os.replace(tmp_path, filepath)
    finally:
        if tmp_path.exists():
            tmp_path.unlink()
