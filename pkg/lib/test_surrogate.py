# Copyright 2021 The Pump Study Authors.
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
# ==============================================================================
"""

Test surrogate

"""

import design_space
import pump_oracle
import surrogate
from surrogate import SurrogatePredictor
from study_errors import DataError

import numpy as np
import pytest

def oracleData(count, seed, nonlinearScale=1.0, noiseSigma=0.0):
    oracle = pump_oracle.SyntheticPumpOracle(design_space.makeDuty(100.0, 80.0, 2950.0), noiseSigma=noiseSigma,
                                             nonlinearScale=nonlinearScale)
    inputs = design_space.lhsSample(oracle.space, ['D2', 'b2', 'beta2'], count, seed)
    return oracle.evaluateDataset(inputs)


SMALL_PARAMS = {
    'rsf': {},
    'rbf': {'centers': 10},
    'krg': {'starts': 2},
    'nn': {'hidden': 4, 'epochs': 15, 'log_every': 0},
}


def test_registry():
    assert sorted(surrogate.getModelKinds()) == ['krg', 'nn', 'rbf', 'rsf']


def test_rsf_exact_on_quadratic_oracle():
    train = oracleData(20, 1, nonlinearScale=0.0)
    held = oracleData(10, 2, nonlinearScale=0.0)
    model = surrogate.fitSurrogate('rsf', train)
    predicted = model.predictDataset(held)
    for o in ('head', 'power'):
        assert np.max(np.abs(predicted[o] - held.column(o)) / np.abs(held.column(o))) < 1e-8


def test_interpolating_kinds():
    train = oracleData(30, 3)
    for (kind, params) in (('rbf', {'width_rule': 'nearest'}), ('krg', {'nugget': 0.0, 'theta': [5.0, 5.0, 5.0]})):
        model = surrogate.fitSurrogate(kind, train, ['head'], params)
        predicted = model.predictDataset(train)['head']
        assert np.max(np.abs(predicted - train.column('head'))) <= 1e-6 * np.max(train.column('head'))


def test_save_load_all_kinds(tmp_path):
    train = oracleData(24, 4)
    test = oracleData(5, 5)
    for kind in ('rsf', 'rbf', 'krg', 'nn'):
        model = surrogate.fitSurrogate(kind, train, params=SMALL_PARAMS[kind], seed=3)
        path = str(tmp_path / (kind + '.json'))
        model.save(path, {'digest': 'd', 'seed': 3})
        loaded = SurrogatePredictor.load(path)
        assert loaded.kind == kind
        assert loaded.objectives == ['head', 'power']
        before = model.predictRows(test.inputMatrix())
        after = loaded.predictRows(test.inputMatrix())
        assert np.array_equal(before, after)


def test_fit_deterministic():
    train = oracleData(24, 6)
    for kind in ('rbf', 'krg', 'nn'):
        a = surrogate.fitSurrogate(kind, train, params=SMALL_PARAMS[kind], seed=1)
        b = surrogate.fitSurrogate(kind, train, params=SMALL_PARAMS[kind], seed=1)
        assert np.array_equal(a.predictRows(train.inputMatrix()), b.predictRows(train.inputMatrix()))


def test_nn_per_objective():
    train = oracleData(20, 7)
    val = oracleData(4, 8)
    model = surrogate.fitSurrogate('nn', train, params={'hidden': 3, 'epochs': 5, 'joint': False, 'log_every': 0}, val=val)
    assert list(model.models) == ['head', 'power']
    assert list(model.trainReports) == ['head', 'power']
    assert model.predictRows(val.inputMatrix()).shape == (4, 2)


def test_nn_per_objective_save_load(tmp_path):
    train = oracleData(20, 13)
    test = oracleData(5, 14)
    params = {'hidden': 3, 'epochs': 10, 'joint': False, 'log_every': 0}
    model = surrogate.fitSurrogate('nn', train, ['power', 'head'], params, seed=2)
    path = str(tmp_path / 'nn.json')
    model.save(path, {'digest': 'd', 'seed': 2})
    loaded = SurrogatePredictor.load(path)
    assert loaded.objectives == ['power', 'head']
    assert np.allclose(model.predictRows(test.inputMatrix()), loaded.predictRows(test.inputMatrix()), rtol=1e-12, atol=0)
    predicted = loaded.predictDataset(test)
    assert np.all(np.abs(predicted['head'] - test.column('head')) < np.abs(predicted['head'] - test.column('power')))
    assert loaded.header['digest'] == 'd'


def test_fit_errors():
    train = oracleData(20, 9)
    with pytest.raises(DataError):
        surrogate.fitSurrogate('svm', train)
    with pytest.raises(DataError):
        surrogate.fitSurrogate('rbf', train, params={'kernel': 'cubic'})
    with pytest.raises(DataError):
        surrogate.fitSurrogate('rsf', train, ['efficiency'])
    model = surrogate.fitSurrogate('rsf', train)
    with pytest.raises(DataError):
        model.predictRows([[0.27, 0.015]])


def test_fit_leaves_training_data():
    train = oracleData(20, 10)
    before = np.array(train.values)
    surrogate.fitSurrogate('krg', train, params={'starts': 2})
    assert np.array_equal(train.values, before)


def test_select_rbf_centers():
    train = oracleData(25, 11)
    val = oracleData(8, 12)
    (best, scores) = surrogate.selectRbfCenters(train, val, 'head', candidates=(10, 20, 30))
    assert list(scores) == [10, 20]
    assert best in (10, 20)
    assert scores[best] == min(scores.values())
