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
Unlearning of features of one passive party by knowledge distillation.

The party distils its local model (teacher) into a student which does not
see the removed columns. The loss is the KL divergence between the
row-wise softmax of the student and teacher embeddings. No labels are
used and no message is sent, the embedding width does not change.
"""

import logging

from pyvfu.data.batching import make_batch_plan
from pyvfu.nn.mlp import predict
from pyvfu.objects.errors import RequestError
from pyvfu.objects.reports import MetricsRecord, UnlearningReport, PHASE_UNLEARN
from pyvfu.objects.vfl_struct import parse_party, party_name
from pyvfu.unlearn.common import (
    converged, embedding_kl_loss_fn, fresh_student, unlearning_window
)
from pyvfu.vfl.protocol import apply_update, evaluate

logger = logging.getLogger(__name__)

METHOD = 'vfu-kd-feature'


def kept_columns(owned_features, features):
    """
    Local column indices which remain after removing 'features'

    Raises:
        :RequestError: If the features are not a nonempty strict subset of the owned ones
    """

    features = set(int(f) for f in features)
    unknown = features - set(owned_features)
    if not features:
        raise RequestError("No features to unlearn")
    if unknown:
        raise RequestError(f"Features {sorted(unknown)} are not owned by the party")
    if features == set(owned_features):
        raise RequestError("Cannot unlearn all features of a party, unlearn the party instead")
    return [i for i, f in enumerate(owned_features) if f not in features]


def unlearn_features_kd(party, features, config, distill_epochs=None, bus=None, evaluate_fn=None):
    """
    Distil a passive model into a student without some input features

    Args:
        :party: (obj) 'PartyState' (model, owned features and training data)
        :features: (list) Global indices of the features to unlearn
        :config: (obj) 'VflConfig' (lr_passive, batch size, update rule, seed)
        :distill_epochs: (int) Number of distillation epochs (default: 'config.distill_epochs',
            otherwise 'config.epochs')
        :bus: (obj) 'MessageBus' used to assert that no message is sent
        :evaluate_fn: (callable) Optional 'evaluate_fn(student, keep)' returning an 'EvalResult'

    Returns:
        :student: (obj) New passive model
        :keep: (list) Local column indices seen by the student
        :report: (obj) 'UnlearningReport'
    """

    keep = kept_columns(party.owned_features, features)
    num_distill = distill_epochs or config.distill_epochs or config.epochs

    teacher = party.model
    student = fresh_student(teacher, len(keep), seed=[config.seed, party.party_id, 3])
    data = party.data.features
    n = data.shape[0]

    report = UnlearningReport(METHOD)
    report.extra['target_party'] = party_name(party.party_id)
    report.extra['features'] = sorted(int(f) for f in features)

    logger.info(
        f"Unlearning features {report.extra['features']} of party "
        f"{party_name(party.party_id)} by distillation ({num_distill} epochs)"
    )

    with unlearning_window(bus, report):
        previous = None
        for epoch in range(1, num_distill + 1):
            total = 0.0
            for rows in make_batch_plan(n, config.batch_size, epoch, config.seed):
                x = data[rows]
                loss_fn = embedding_kl_loss_fn(x[:, keep], predict(teacher, x))
                loss, grads = loss_fn(student)
                student = apply_update(student, grads, config.lr_passive, loss_fn, config)
                total += loss*len(rows)

            kl = total/n
            report.train_losses.append(kl)
            report.student_teacher_kl.append(kl)

            if evaluate_fn is not None:
                result = evaluate_fn(student, keep)
                report.records.append(MetricsRecord(epoch, PHASE_UNLEARN, kl, result.loss, result.f1, result.auc))

            logger.info(f"--> distil epoch {epoch:3d} | KL {kl:.6f}")
            if converged(previous, kl):
                logger.info(f"Distillation converged after {epoch} epochs")
                break
            previous = kl

    report.extra['terminal_kl'] = terminal_kl(teacher, student, data, keep)
    return student, keep, report


def terminal_kl(teacher, student, data, keep):
    """Mean KL between student and teacher embeddings on the full data"""

    loss_fn = embedding_kl_loss_fn(data[:, keep], predict(teacher, data))
    loss, _ = loss_fn(student)
    return loss


def unlearn_features(federation, target, features, distill_epochs=None, track=True):
    """
    Unlearn features of a party of a federation

    The student replaces the party's model and the removed columns are
    deleted from the party's training and test data.

    Returns:
        :report: (obj) 'UnlearningReport'
    """

    target = parse_party(target)
    if target not in federation.party_ids:
        raise RequestError(f"Unknown party {party_name(target)}")
    party = federation.party(target)

    evaluate_fn = None
    if track:
        def evaluate_fn(model, keep):
            datasets = {p.party_id: p.test_data.features for p in federation.parties}
            datasets[target] = party.test_data.features[:, keep]
            return evaluate(federation, datasets=datasets, party_models={target: model})

    student, keep, report = unlearn_features_kd(
        party, features, federation.config, distill_epochs, federation.bus, evaluate_fn
    )

    party.model = student
    party.data = party.data.select_columns(keep, keep_labels=False)
    party.test_data = party.test_data.select_columns(keep, keep_labels=False)
    party.owned_features = [party.owned_features[i] for i in keep]
    federation.split.assignments[target] = list(party.owned_features)
    return report

