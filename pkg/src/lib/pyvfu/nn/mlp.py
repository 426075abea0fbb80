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
Forward and backward pass through a dense network.

The forward pass returns a cache with the layer inputs and pre-activations.
The cache remembers the weight shapes of the model which produced it, and
'backward()' refuses a cache created by a model of different shape.
"""

import logging

import numpy as np

from pyvfu.objects.errors import ShapeError, ModelStateError
from pyvfu.objects.model import as_matrix, ForwardCache, GradientSet, RELU

logger = logging.getLogger(__name__)


def _activate(z, activation):
    if activation == RELU:
        return np.maximum(z, 0.0)
    return z


def forward(model, batch):
    """
    Run a batch through a model

    Args:
        :model: (obj) 'MlpModel'
        :batch: (numpy) Input matrix (n x input_dim)

    Returns:
        :output: (numpy) Output matrix (n x output_dim)
        :cache: (obj) Activation record needed by 'backward()'

    Raises:
        :ShapeError: If the batch width does not match the model
    """

    x = as_matrix(batch, 'batch')

    inputs = []
    pre_activations = []
    for i, layer in enumerate(model.layers):
        if x.shape[1] != layer.in_dim:
            raise ShapeError(
                f"Layer {i} expects {layer.in_dim} input columns, got {x.shape[1]}"
            )
        inputs.append(x)
        z = x @ layer.weights.T + layer.bias
        pre_activations.append(z)
        x = _activate(z, layer.activation)

    return x, ForwardCache(model.shapes, inputs, pre_activations)


def predict(model, batch):
    """Return the model output only"""

    output, _ = forward(model, batch)
    return output


def backward(model, cache, upstream_grad):
    """
    Backpropagate an upstream gradient through a model

    Args:
        :model: (obj) 'MlpModel' used in the forward pass
        :cache: (obj) Cache returned by 'forward()'
        :upstream_grad: (numpy) Gradient of the loss w.r.t. the model output

    Returns:
        :grads: (obj) 'GradientSet' including the gradient w.r.t. the input batch

    Raises:
        :ModelStateError: If the cache was not created by a model of this shape
        :ShapeError: If the upstream gradient does not match the forward output
    """

    if tuple(cache.shapes) != model.shapes:
        raise ModelStateError(
            f"Forward cache was created for shapes {cache.shapes}, "
            f"model has shapes {model.shapes}"
        )

    grad = as_matrix(upstream_grad, 'upstream_grad')
    expected = (cache.inputs[0].shape[0], model.output_dim)
    if grad.shape != expected:
        raise ShapeError(f"Upstream gradient has shape {grad.shape}, expected {expected}")

    num_layers = len(model.layers)
    weight_grads = [None]*num_layers
    bias_grads = [None]*num_layers

    for i in reversed(range(num_layers)):
        layer = model.layers[i]
        if layer.activation == RELU:
            grad = grad*(cache.pre_activations[i] > 0)
        weight_grads[i] = grad.T @ cache.inputs[i]
        bias_grads[i] = grad.sum(axis=0)
        grad = grad @ layer.weights

    return GradientSet(weight_grads, bias_grads, input_gradient=grad)
