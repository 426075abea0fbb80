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
Parameter updates: plain gradient descent, damped Newton and Gauss-Newton steps.

Newton steps flatten all parameters into a single vector. The Hessian is
assembled column by column from central differences of the analytic
gradient, so only small models are practical. Gauss-Newton steps take the
curvature of a downstream loss w.r.t. the model output and need only
forward passes.
"""

import logging
import warnings

import numpy as np
from scipy.linalg import solve, LinAlgError, LinAlgWarning

from pyvfu.nn.mlp import forward
from pyvfu.objects.errors import ShapeError, SingularMatrixError
from pyvfu.objects.model import DenseLayer, MlpModel

logger = logging.getLogger(__name__)

HESSIAN_STEP = 1e-5


def sgd_step(model, grads, lr):
    """
    Gradient descent step p <- p - lr*g

    Args:
        :model: (obj) 'MlpModel'
        :grads: (obj) 'GradientSet' matching the model
        :lr: (float) Learning rate

    Returns:
        :model: (obj) New, updated model
    """

    if lr < 0:
        raise ValueError(f"Learning rate must not be negative, got {lr}")
    grads.check_matches(model)

    layers = []
    for layer, w_grad, b_grad in zip(model.layers, grads.weight_grads, grads.bias_grads):
        layers.append(DenseLayer(
            layer.weights - lr*w_grad,
            layer.bias - lr*b_grad,
            layer.activation
        ))
    return MlpModel(layers)


def finite_diff_hessian(model, loss_fn, step=HESSIAN_STEP):
    """
    Symmetric Hessian from central differences of the analytic gradient

    Args:
        :model: (obj) 'MlpModel'
        :loss_fn: (callable) 'loss_fn(model)' returning (loss, GradientSet)
        :step: (float) Finite difference step

    Returns:
        :grad: (numpy) Gradient vector at the current parameters
        :hessian: (numpy) Hessian matrix (P x P)
    """

    params = model.get_params()

    def grad_at(vector):
        _, grads = loss_fn(model.with_params(vector))
        return grads.to_vector()

    grad = grad_at(params)
    num_params = params.size
    hessian = np.empty((num_params, num_params))
    for i in range(num_params):
        shift = np.zeros(num_params)
        shift[i] = step
        hessian[:, i] = (grad_at(params + shift) - grad_at(params - shift))/(2*step)

    return grad, 0.5*(hessian + hessian.T)


def _solve_damped(curvature, grad, damping):
    system = curvature + damping*np.eye(grad.size)

    with warnings.catch_warnings():
        warnings.simplefilter('error', LinAlgWarning)
        try:
            delta = solve(system, grad)
        except (LinAlgError, LinAlgWarning) as err:
            raise SingularMatrixError(
                f"Damped Hessian is singular or ill-conditioned (damping={damping}). "
                f"Use a larger damping. ({err})"
            )

    if not np.all(np.isfinite(delta)):
        raise SingularMatrixError(f"Newton step is not finite (damping={damping}). Use a larger damping.")
    return delta


def newton_step(model, loss_fn, damping=1e-3, step=HESSIAN_STEP, lr=1.0):
    """
    Damped Newton step v <- v - lr*(H + damping*I)^-1 g

    Args:
        :model: (obj) 'MlpModel'
        :loss_fn: (callable) 'loss_fn(model)' returning (loss, GradientSet)
        :damping: (float) Tikhonov damping added to the Hessian diagonal
        :lr: (float) Step size scaling the Newton direction

    Returns:
        :model: (obj) New, updated model

    Raises:
        :SingularMatrixError: If the damped Hessian cannot be inverted
    """

    if damping < 0:
        raise ValueError(f"Damping must not be negative, got {damping}")
    if lr < 0:
        raise ValueError(f"Learning rate must not be negative, got {lr}")

    grad, hessian = finite_diff_hessian(model, loss_fn, step)
    delta = _solve_damped(hessian, grad, damping)
    return model.with_params(model.get_params() - lr*delta)


def finite_diff_jacobian(model, batch, step=HESSIAN_STEP):
    """
    Per-row Jacobian of the model output w.r.t. the flat parameters

    Args:
        :model: (obj) 'MlpModel'
        :batch: (numpy) Input matrix (n x input_dim)

    Returns:
        :jacobian: (numpy) Array of shape (n x output_dim x P)
    """

    params = model.get_params()
    columns = []
    for i in range(params.size):
        shift = np.zeros(params.size)
        shift[i] = step
        upper, _ = forward(model.with_params(params + shift), batch)
        lower, _ = forward(model.with_params(params - shift), batch)
        columns.append((upper - lower)/(2*step))
    return np.stack(columns, axis=-1)


def gauss_newton_step(model, grads, jacobian, curvature, damping=1e-3, lr=1.0):
    """
    Damped Gauss-Newton step for a model whose output feeds a downstream loss

    The curvature of the loss w.r.t. each output row is pulled back through
    the per-row Jacobian, G = sum_i J_i^T C_i J_i.

    Args:
        :model: (obj) 'MlpModel'
        :grads: (obj) 'GradientSet' of the downstream loss
        :jacobian: (numpy) Output Jacobian (n x output_dim x P)
        :curvature: (numpy) Output curvature of every row (n x output_dim x output_dim)
        :damping: (float) Tikhonov damping added to the diagonal
        :lr: (float) Step size scaling the Newton direction

    Returns:
        :model: (obj) New, updated model

    Raises:
        :ShapeError: If Jacobian and curvature do not match the model
        :SingularMatrixError: If the damped system cannot be inverted
    """

    if damping < 0:
        raise ValueError(f"Damping must not be negative, got {damping}")
    if lr < 0:
        raise ValueError(f"Learning rate must not be negative, got {lr}")
    grads.check_matches(model)

    n, out_dim, num_params = jacobian.shape
    if num_params != model.num_params or out_dim != model.output_dim:
        raise ShapeError(f"Jacobian of shape {jacobian.shape} does not match the model")
    if curvature.shape != (n, out_dim, out_dim):
        raise ShapeError(f"Curvature has shape {curvature.shape}, expected {(n, out_dim, out_dim)}")

    gauss_newton = np.einsum('iap,iab,ibq->pq', jacobian, curvature, jacobian)
    gauss_newton = 0.5*(gauss_newton + gauss_newton.T)
    delta = _solve_damped(gauss_newton, grads.to_vector(), damping)
    return model.with_params(model.get_params() - lr*delta)
