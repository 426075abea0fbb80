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

from collections import OrderedDict

import numpy as np
from pytest import approx, raises

from pyvfu.data import make_batch_plan
from pyvfu.nn import backward, cross_entropy_loss, forward, sgd_step
from pyvfu.objects.errors import ProtocolError
from pyvfu.objects.model import MlpModel
from pyvfu.objects.vfl_struct import (
    CHANNEL_EVAL, CHANNEL_TRAIN, CURVATURE_DOWN, EMBEDDING_UP, GRADIENT_DOWN, Message, PartyState
)
from pyvfu.vfl import build_federation, embedding_curvature, evaluate, train_vfl


def test_build_federation(make_federation):
    federation = make_federation()
    assert federation.party_ids == [0, 1, 2]
    assert federation.active.party_id == 2
    assert [p.is_active for p in federation.parties] == [False, False, True]
    assert federation.active.model.input_dim == 3*8
    assert all(p.labels is None for p in federation.parties[:2])
    assert not any(p.data.has_labels or p.test_data.has_labels for p in federation.parties)


def test_separate_active_party(make_config, make_data):
    train, test, split = make_data()
    federation = build_federation(train, test, split, make_config(), active_owns_features=False)
    assert federation.active.party_id == 3
    assert not any(p.is_active for p in federation.parties)


def test_labels_stay_with_active_party(make_data):
    train, _, _ = make_data()
    model = MlpModel.init_random([12, 8], 0)
    with raises(ProtocolError):
        PartyState(0, model, list(range(12)), train.without_labels(), labels=train.labels)
    with raises(ProtocolError):
        PartyState(0, model, list(range(12)), train)


def test_message_direction(make_federation):
    bus = make_federation().bus
    with raises(ProtocolError):
        bus.send(Message(GRADIENT_DOWN, 0, 1, 1, 0, np.zeros((2, 8))))
    with raises(ProtocolError):
        bus.send(Message(CURVATURE_DOWN, 1, 0, 1, 0, np.zeros((2, 64))))
    with raises(ProtocolError):
        bus.send(Message(EMBEDDING_UP, 2, 0, 1, 0, np.zeros((2, 8))))
    with raises(ProtocolError):
        bus.send(Message(EMBEDDING_UP, 0, 2, 1, 0, np.array([1.0, np.nan])))
    with raises(ProtocolError):
        bus.receive(2, EMBEDDING_UP)


def test_training_improves(make_federation):
    federation = make_federation()
    before = evaluate(federation)
    records = train_vfl(federation, 5)

    assert [r.epoch for r in records] == [1, 2, 3, 4, 5]
    assert federation.epochs_done == 5
    assert records[-1].test_loss < before.loss
    assert records[-1].f1 > 0.85
    assert records[-1].auc > 0.9

    more = train_vfl(federation, 2)
    assert [r.epoch for r in more] == [6, 7]
    assert len(federation.history) == 7


def test_message_tally(make_federation):
    federation = make_federation(epochs=2)
    train_vfl(federation)
    bus = federation.bus

    batches = len(make_batch_plan(federation.num_train, 32, 1, 0))
    assert bus.count == 2*batches*3*2
    assert bus.kind_tally[(CHANNEL_TRAIN, EMBEDDING_UP)] == bus.kind_tally[(CHANNEL_TRAIN, GRADIENT_DOWN)]
    assert bus.tally[CHANNEL_EVAL] == 2*3
    assert bus.pending(2) == 0


def test_store_records(make_federation):
    federation = make_federation(epochs=3)
    train_vfl(federation)
    store = federation.store

    batches = len(make_batch_plan(federation.num_train, 32, 1, 0))
    assert len(store) == 3*batches
    assert store.epochs() == [1, 2, 3]
    assert store.width == 24
    assert np.array_equal(store.sample_ids(), np.sort(federation.train_sample_ids))

    ids = np.concatenate([rec.sample_ids for _, rec in store.records_for_epoch(2)])
    assert sorted(ids) == sorted(federation.train_sample_ids)


def test_store_retention(make_federation):
    federation = make_federation(epochs=4, keep_last_epochs=2)
    train_vfl(federation)
    assert federation.store.epochs() == [3, 4]


def test_deterministic(make_federation):
    first = train_vfl(make_federation(epochs=3))
    second = train_vfl(make_federation(epochs=3))
    assert first == second


def test_parallel_parties_match_sequential(make_federation):
    sequential = train_vfl(make_federation(epochs=2))
    parallel = train_vfl(make_federation(epochs=2, max_workers=3))
    assert [r.train_loss for r in parallel] == approx([r.train_loss for r in sequential], abs=1e-12)


def test_centralised_equivalence(make_config, make_data):
    """
    One passive party with a frozen identity model trains the top model
    exactly as centralised training does
    """

    train, test, split = make_data(parties=1)
    config = make_config(parties=1, lr_passive=0.0)
    federation = build_federation(train, test, split, config, active_owns_features=False)

    d = train.num_features
    federation.set_party_model(0, MlpModel.identity(d))
    top = MlpModel.init_random([d, 16, 2], 5)
    federation.active.model = top.copy()
    records = train_vfl(federation, 10)

    model = top.copy()
    for epoch in range(1, 11):
        total = 0.0
        for rows in make_batch_plan(len(train), config.batch_size, epoch, config.seed):
            logits, cache = forward(model, train.features[rows])
            loss, grad = cross_entropy_loss(logits, train.labels[rows])
            model = sgd_step(model, backward(model, cache, grad), config.lr_active)
            total += loss*len(rows)
        assert records[epoch - 1].train_loss == approx(total/len(train), abs=1e-9)

    assert np.allclose(federation.active.model.get_params(), model.get_params(), atol=1e-12)


def test_embedding_curvature():
    rng = np.random.default_rng(5)
    model = MlpModel.init_random([4, 5, 2], 5)
    concat = rng.normal(size=(6, 4))
    labels = rng.integers(0, 2, size=6)
    slices = OrderedDict([(0, (0, 1)), (1, (1, 4))])

    def input_gradient(h):
        logits, cache = forward(model, h)
        _, grad = cross_entropy_loss(logits, labels)
        return backward(model, cache, grad).input_gradient

    step = 1e-5
    hessian = np.empty((6, 4, 4))
    for a in range(4):
        shift = np.zeros_like(concat)
        shift[:, a] = step
        hessian[:, :, a] = (input_gradient(concat + shift) - input_gradient(concat - shift))/(2*step)

    curvature = embedding_curvature(model, concat, slices)
    assert curvature[0].shape == (6, 1, 1)
    assert curvature[1].shape == (6, 3, 3)
    assert np.allclose(curvature[0], hessian[:, :1, :1], atol=1e-7)
    assert np.allclose(curvature[1], hessian[:, 1:, 1:], atol=1e-7)
    assert np.all(np.linalg.eigvalsh(curvature[1]) > -1e-12)


def test_newton_update_rule(make_federation, make_data):
    federation = make_federation(
        data=make_data(n=100, d=4, parties=2), parties=2, epochs=3, batch_size=50,
        update_rule='newton', passive_hidden=0, embedding_dim=2, active_hidden=0
    )
    assert federation.config.damping == 1e-3
    passive = federation.parties[0]

    records = train_vfl(federation)
    losses = [r.train_loss for r in records]
    assert np.all(np.isfinite(losses))
    assert losses[-1] <= losses[0]
    assert np.linalg.norm(passive.model.get_params()) < 50.0

    bus = federation.bus
    assert bus.kind_tally[(CHANNEL_TRAIN, CURVATURE_DOWN)] == 2*2*3
    assert bus.kind_tally[(CHANNEL_TRAIN, CURVATURE_DOWN)] == bus.kind_tally[(CHANNEL_TRAIN, GRADIENT_DOWN)]
    assert bus.pending(0) == 0


def test_newton_step_scales_with_learning_rate(make_federation, make_data):
    data = make_data(n=100, d=4, parties=2)
    settings = dict(
        parties=2, epochs=1, batch_size=100, update_rule='newton',
        passive_hidden=0, embedding_dim=2, active_hidden=0
    )
    initial = make_federation(data=data, **settings).parties[0].model.get_params()

    moves = []
    for lr in (0.1, 0.2):
        federation = make_federation(data=data, lr_passive=lr, **settings)
        train_vfl(federation)
        moves.append(federation.parties[0].model.get_params() - initial)

    assert np.linalg.norm(moves[0]) > 0
    assert np.allclose(moves[1], 2*moves[0], rtol=1e-9, atol=1e-12)
