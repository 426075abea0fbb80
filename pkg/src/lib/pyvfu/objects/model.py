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
Data structures for dense feed-forward networks. The model hierarchy is::

    |     MLPMODEL
    |        |
    |   DENSELAYER (1..n)
    |        |
    |   weights (out x in), bias (out), activation

Matrices are two-dimensional float64 numpy arrays. Parameters are
flattened layer by layer, weights (row-major) first, then the bias.
"""

from collections import namedtuple
import logging

import numpy as np

from pyvfu.objects.errors import ShapeError

logger = logging.getLogger(__name__)

RELU = 'relu'
IDENTITY = 'identity'
ACTIVATIONS = (RELU, IDENTITY)

ForwardCache = namedtuple('ForwardCache', ['shapes', 'inputs', 'pre_activations'])


def as_matrix(data, name='matrix'):
    """
    Return data as a finite two-dimensional float64 array

    Args:
        :data: (array-like) Matrix data
        :name: (str) Name used in error messages

    Returns:
        :matrix: (numpy) Two-dimensional array

    Raises:
        :ShapeError: If the data is not two-dimensional
        :ValueError: If the data contains NaN or Inf
    """

    matrix = np.asarray(data, dtype=np.float64)
    if matrix.ndim != 2:
        raise ShapeError(f"'{name}' must be two-dimensional, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError(f"'{name}' contains non-finite values")
    return matrix


class DenseLayer:

    def __init__(self, weights, bias, activation=RELU):
        """
        Fully connected layer computing act(x @ W.T + b)

        Attributes:
            :weights: (numpy) weight matrix (out_dim x in_dim)
            :bias: (numpy) bias vector (out_dim)
            :activation: (str) 'relu' or 'identity'
        """

        self.weights = as_matrix(weights, 'weights')
        self.bias = np.asarray(bias, dtype=np.float64).reshape(-1)

        if self.bias.shape[0] != self.weights.shape[0]:
            raise ShapeError(
                f"Bias length {self.bias.shape[0]} does not match "
                f"weight rows {self.weights.shape[0]}"
            )

        if activation not in ACTIVATIONS:
            raise ValueError(f"Unknown activation '{activation}', use one of {ACTIVATIONS}")
        self.activation = activation

    @property
    def in_dim(self):
        return self.weights.shape[1]

    @property
    def out_dim(self):
        return self.weights.shape[0]

    @property
    def num_params(self):
        return self.weights.size + self.bias.size

    def copy(self):
        return DenseLayer(self.weights.copy(), self.bias.copy(), self.activation)


class MlpModel:

    def __init__(self, layers):
        """
        Feed-forward network made of dense layers

        Args:
            :layers: (list) Ordered 'DenseLayer' objects

        Raises:
            :ShapeError: If consecutive layer dimensions do not chain
        """

        if not layers:
            raise ValueError("A model needs at least one layer")

        for i in range(1, len(layers)):
            if layers[i].in_dim != layers[i-1].out_dim:
                raise ShapeError(
                    f"Layer {i} expects {layers[i].in_dim} inputs, "
                    f"but layer {i-1} has {layers[i-1].out_dim} outputs"
                )

        self.layers = list(layers)

    @classmethod
    def init_random(cls, dims, rng, hidden_activation=RELU, output_activation=IDENTITY):
        """
        Create a model with Glorot-uniform weights and zero biases

        Args:
            :dims: (list) Layer widths [input_dim, hidden..., output_dim]
            :rng: (obj) Numpy random generator or integer seed
            :hidden_activation: (str) Activation of hidden layers
            :output_activation: (str) Activation of the output layer

        Returns:
            :model: (obj) New model
        """

        if len(dims) < 2:
            raise ValueError("'dims' needs at least an input and an output width")
        if any(int(dim) < 1 for dim in dims):
            raise ShapeError(f"Layer widths must be positive, got {list(dims)}")

        rng = np.random.default_rng(rng)
        layers = []
        for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
            limit = np.sqrt(6.0/(fan_in + fan_out))
            weights = rng.uniform(-limit, limit, size=(fan_out, fan_in))
            activation = output_activation if i == len(dims) - 2 else hidden_activation
            layers.append(DenseLayer(weights, np.zeros(fan_out), activation))
        return cls(layers)

    @classmethod
    def identity(cls, dim):
        """Single layer model which returns its input"""

        return cls([DenseLayer(np.eye(dim), np.zeros(dim), IDENTITY)])

    @property
    def input_dim(self):
        return self.layers[0].in_dim

    @property
    def output_dim(self):
        return self.layers[-1].out_dim

    @property
    def num_params(self):
        return sum(layer.num_params for layer in self.layers)

    @property
    def shapes(self):
        """Tuple of weight shapes, used to match caches and gradients"""

        return tuple(layer.weights.shape for layer in self.layers)

    @property
    def dims(self):
        return [self.input_dim] + [layer.out_dim for layer in self.layers]

    def copy(self):
        return MlpModel([layer.copy() for layer in self.layers])

    def get_params(self):
        """Return all parameters as one flat vector"""

        parts = []
        for layer in self.layers:
            parts.append(layer.weights.ravel())
            parts.append(layer.bias)
        return np.concatenate(parts)

    def with_params(self, vector):
        """
        Return a new model with parameters taken from a flat vector

        Args:
            :vector: (numpy) Flat parameter vector (see 'get_params()')

        Returns:
            :model: (obj) New model with the same architecture
        """

        vector = np.asarray(vector, dtype=np.float64).reshape(-1)
        if vector.size != self.num_params:
            raise ShapeError(f"Expected {self.num_params} parameters, got {vector.size}")

        layers = []
        pos = 0
        for layer in self.layers:
            num_w = layer.weights.size
            weights = vector[pos:pos+num_w].reshape(layer.weights.shape)
            pos += num_w
            bias = vector[pos:pos+layer.out_dim]
            pos += layer.out_dim
            layers.append(DenseLayer(weights.copy(), bias.copy(), layer.activation))
        return MlpModel(layers)


class GradientSet:

    def __init__(self, weight_grads, bias_grads, input_gradient=None):
        """
        Gradients of a scalar loss with respect to a model

        Attributes:
            :weight_grads: (list) Gradient for each weight matrix
            :bias_grads: (list) Gradient for each bias vector
            :input_gradient: (numpy) Gradient w.r.t. the model input batch (or None)
        """

        self.weight_grads = [np.asarray(g, dtype=np.float64) for g in weight_grads]
        self.bias_grads = [np.asarray(g, dtype=np.float64).reshape(-1) for g in bias_grads]
        self.input_gradient = input_gradient

    @classmethod
    def zeros_like(cls, model):
        return cls(
            [np.zeros_like(layer.weights) for layer in model.layers],
            [np.zeros_like(layer.bias) for layer in model.layers],
        )

    @classmethod
    def from_vector(cls, model, vector):
        """Split a flat gradient vector along the parameters of 'model'"""

        shaped = model.with_params(vector)
        return cls(
            [layer.weights for layer in shaped.layers],
            [layer.bias for layer in shaped.layers],
        )

    def to_vector(self):
        parts = []
        for w_grad, b_grad in zip(self.weight_grads, self.bias_grads):
            parts.append(w_grad.ravel())
            parts.append(b_grad)
        return np.concatenate(parts)

    def check_matches(self, model):
        """
        Make sure gradient shapes match a model

        Raises:
            :ShapeError: If shapes do not match
        """

        if len(self.weight_grads) != len(model.layers):
            raise ShapeError(
                f"Gradient has {len(self.weight_grads)} layers, model has {len(model.layers)}"
            )

        for i, (layer, w_grad, b_grad) in enumerate(zip(model.layers, self.weight_grads, self.bias_grads)):
            if w_grad.shape != layer.weights.shape or b_grad.shape != layer.bias.shape:
                raise ShapeError(
                    f"Gradient of layer {i} has shape {w_grad.shape}/{b_grad.shape}, "
                    f"expected {layer.weights.shape}/{layer.bias.shape}"
                )

    def scaled(self, factor):
        """Return a new gradient set multiplied by 'factor'"""

        input_gradient = None if self.input_gradient is None else factor*self.input_gradient
        return GradientSet(
            [factor*g for g in self.weight_grads],
            [factor*g for g in self.bias_grads],
            input_gradient,
        )

    def __add__(self, other):
        if len(self.weight_grads) != len(other.weight_grads):
            raise ShapeError("Cannot add gradients of different models")

        if self.input_gradient is None or other.input_gradient is None:
            input_gradient = None
        else:
            input_gradient = self.input_gradient + other.input_gradient

        return GradientSet(
            [a + b for a, b in zip(self.weight_grads, other.weight_grads)],
            [a + b for a, b in zip(self.bias_grads, other.bias_grads)],
            input_gradient,
        )
