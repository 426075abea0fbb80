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
Dense neural network operations (forward, backward, losses and updates).
"""

from pyvfu.nn.mlp import forward, backward, predict
from pyvfu.nn.losses import softmax, cross_entropy_loss, kl_divergence
from pyvfu.nn.optim import (
    sgd_step, newton_step, gauss_newton_step, finite_diff_hessian, finite_diff_jacobian
)
from pyvfu.nn.gradcheck import finite_diff_grad, gradient_errors
