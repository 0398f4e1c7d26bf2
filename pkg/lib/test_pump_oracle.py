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

Test pump_oracle

"""

import design_space
import pump_oracle
from pump_oracle import SyntheticPumpOracle
from study_errors import DataError

import numpy as np
import pytest

def studyOracle(**kwargs):
    return SyntheticPumpOracle(design_space.makeDuty(100.0, 80.0, 2950.0), **kwargs)


def test_midpoint_values():
    oracle = studyOracle(noiseSigma=0.0)
    r = oracle.evaluate({})
    assert r.head == pytest.approx(80.0)
    assert r.power == pytest.approx(oracle.referencePower)
    assert r.efficiency == pytest.approx(76.0)
    assert not r.extrapolated


def test_flow_ratio():
    design = studyOracle(noiseSigma=0.0).evaluate({})
    part = studyOracle(noiseSigma=0.0, flowRatio=0.7).evaluate({})
    assert part.head == pytest.approx(design.head * (1.15 - 0.15 * 0.49))
    assert part.power == pytest.approx(design.power * (0.45 + 0.55 * 0.7))
    assert part.efficiency == pytest.approx(100.0 * 1000 * 9.81 * 0.7 * (100.0 / 3600) * part.head / (1000.0 * part.power))


def test_noise_free_repeatable():
    oracle = studyOracle(noiseSigma=0.0)
    point = {'D2': 0.27, 'b2': 0.015, 'beta2': 20.0}
    assert oracle.evaluate(point, 0) == oracle.evaluate(point, 5)


def test_noise_streams():
    oracle = studyOracle(noiseSigma=0.01, seed=3)
    point = {'D2': 0.27}
    assert oracle.evaluate(point, 1) == oracle.evaluate(point, 1)
    assert oracle.evaluate(point, 1).head != oracle.evaluate(point, 2).head


def test_key_variables_move_head():
    oracle = studyOracle(noiseSigma=0.0)
    low = oracle.evaluate({'D2': oracle.space.variable('D2').lower})
    high = oracle.evaluate({'D2': oracle.space.variable('D2').upper})
    assert high.head > low.head
    assert high.power > low.power


def test_extrapolated_flag():
    oracle = studyOracle(noiseSigma=0.0)
    assert oracle.evaluate({'D2': 0.5}).extrapolated


def test_design_box_responses():
    oracle = studyOracle(noiseSigma=0.0)
    samples = design_space.lhsSample(oracle.space, oracle.space.names, 1000, 12)
    names = samples.inputNames
    for values in samples.columns(names):
        r = oracle.evaluate(dict(zip(names, values)))
        assert not r.extrapolated
        assert r.head > 0 and r.power > 0 and r.efficiency > 0
        assert 8.0 < r.head < 800.0


def test_d3_range_follows_point_d2():
    oracle = studyOracle(noiseSigma=0.0)
    d2 = oracle.space.variable('D2').upper
    (lower, upper) = design_space.d3Bounds(d2)
    assert not oracle.evaluate({'D2': d2, 'D3': upper}).extrapolated
    assert oracle.evaluate({'D2': oracle.space.variable('D2').lower, 'D3': upper}).extrapolated


def test_bad_points():
    oracle = studyOracle()
    with pytest.raises(DataError):
        oracle.evaluate({'D9': 1.0})
    with pytest.raises(DataError):
        oracle.evaluate({'D2': float('nan')})
    with pytest.raises(DataError):
        studyOracle(noiseSigma=-1.0)


def test_evaluate_dataset():
    oracle = studyOracle()
    inputs = design_space.lhsSample(oracle.space, ['D2', 'b2', 'beta2'], 12, 4)
    data = oracle.evaluateDataset(inputs)
    assert data.numRows == 12
    assert data.names == ['D2', 'b2', 'beta2', 'head', 'power']
    assert np.array_equal(data.inputMatrix(), inputs.inputMatrix())


def test_evaluate_dataset_noise_free_order():
    oracle = studyOracle(noiseSigma=0.0)
    inputs = design_space.lhsSample(oracle.space, ['D2', 'b2', 'beta2'], 12, 4)
    data = oracle.evaluateDataset(inputs)
    reversed = oracle.evaluateDataset(inputs.subset(list(range(11, -1, -1))))
    assert np.array_equal(reversed.values[::-1], data.values)


def test_evaluate_dataset_unknown_output():
    oracle = studyOracle()
    inputs = design_space.lhsSample(oracle.space, ['D2'], 3, 4)
    with pytest.raises(DataError):
        oracle.evaluateDataset(inputs, ('head', 'npsh'))


def test_call_returns_mapping():
    result = studyOracle(noiseSigma=0.0)({'b2': 0.016})
    assert set(result) >= {'head', 'power', 'efficiency'}
