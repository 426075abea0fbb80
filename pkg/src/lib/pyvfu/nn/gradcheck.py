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
Finite difference gradients, used to check analytic gradients.
"""

import numpy as np

from pyvfu.objects.model import GradientSet


def finite_diff_grad(loss_fn, model, step=1e-5):
    """
    Central difference gradient (L(p+h) - L(p-h))/2h for every parameter

    Args:
        :loss_fn: (callable) 'loss_fn(model)' returning a scalar loss
        :model: (obj) 'MlpModel'
        :step: (float) Step size h

    Returns:
        :grads: (obj) 'GradientSet' without input gradient
    """

    if step <= 0:
        raise ValueError(f"Step must be positive, got {step}")

    params = model.get_params()
    grad = np.empty_like(params)
    for i in range(params.size):
        shift = np.zeros_like(params)
        shift[i] = step
        loss_plus = loss_fn(model.with_params(params + shift))
        loss_minus = loss_fn(model.with_params(params - shift))
        grad[i] = (loss_plus - loss_minus)/(2*step)

    return GradientSet.from_vector(model, grad)


def gradient_errors(analytic, numeric, small=1e-8):
    """
    Compare two gradients entry by entry

    Entries with an analytic magnitude below 'small' are compared
    absolutely, all others relatively.

    Args:
        :analytic: (obj) 'GradientSet' or array
        :numeric: (obj) 'GradientSet' or array

    Returns:
        :max_rel: (float) Largest relative error
        :max_abs: (float) Largest absolute error among small entries
    """

    if isinstance(analytic, GradientSet):
        analytic = analytic.to_vector()
    if isinstance(numeric, GradientSet):
        numeric = numeric.to_vector()
    analytic = np.ravel(analytic)
    numeric = np.ravel(numeric)

    diff = np.abs(analytic - numeric)
    is_small = np.abs(analytic) < small

    max_abs = float(diff[is_small].max()) if is_small.any() else 0.0
    if (~is_small).any():
        max_rel = float(np.max(diff[~is_small]/np.abs(analytic[~is_small])))
    else:
        max_rel = 0.0
    return max_rel, max_abs
