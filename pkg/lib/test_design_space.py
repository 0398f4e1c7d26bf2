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

Test design_space

"""

import design_space
import pump_oracle
from design_space import DesignSpace
from study_errors import DataError, NumericalError

import math
import numpy as np
import pytest

def studyDuty():
    return design_space.makeDuty(100.0, 80.0, 2950.0)


def test_specific_speed():
    assert design_space.specificSpeed(studyDuty()) == pytest.approx(67.09, abs=0.01)


def test_specific_speed_scaling():
    base = studyDuty()
    ns = design_space.specificSpeed(base)
    assert design_space.specificSpeed(base._replace(Q=4 * base.Q)) == pytest.approx(2 * ns, rel=1e-12)
    assert design_space.specificSpeed(design_space.DutyPoint(1.0, 1.0, 1000.0)) == pytest.approx(3650.0, rel=1e-12)


def test_specific_speed_monotone():
    rng = np.random.default_rng(11)
    for i in range(50):
        (Q, H, n) = (rng.uniform(0.001, 1.0), rng.uniform(5.0, 200.0), rng.uniform(500.0, 5000.0))
        ns = design_space.specificSpeed(design_space.DutyPoint(Q, H, n))
        assert design_space.specificSpeed(design_space.DutyPoint(1.1 * Q, H, n)) > ns
        assert design_space.specificSpeed(design_space.DutyPoint(Q, H, 1.1 * n)) > ns
        assert design_space.specificSpeed(design_space.DutyPoint(Q, 1.1 * H, n)) < ns


def test_specific_speed_hpb40():
    ns = design_space.specificSpeed(design_space.dutyPreset('hpb40'))
    assert 30 < ns < 35


def test_bad_duty():
    with pytest.raises(DataError):
        design_space.makeDuty(0, 80.0, 2950.0)
    with pytest.raises(DataError):
        design_space.dutyPreset('nope')


def test_d2_bounds():
    d2 = design_space.designBounds(studyDuty()).variable('D2')
    assert d2.lower == pytest.approx(0.2683, abs=0.0005)
    assert d2.upper == pytest.approx(0.2864, abs=0.0005)


def test_design_bounds_variables():
    space = design_space.designBounds(studyDuty())
    assert space.names == design_space.VARIABLE_ORDER
    b2 = space.variable('b2')
    assert 0.012 < b2.lower < b2.upper < 0.019
    assert space.variable('beta2')[1:3] == (14.0, 24.0)


def test_d3_follows_d2():
    space = design_space.designBounds(studyDuty(), d2=0.27)
    d3 = space.variable('D3')
    assert d3.lower == pytest.approx(1.03 * 0.27)
    assert d3.upper == pytest.approx(1.06 * 0.27)


def test_lhs_one_sample_per_bin():
    space = design_space.designBounds(studyDuty())
    names = ['D2', 'b2', 'beta2']
    data = design_space.lhsSample(space, names, 60, 3)
    assert data.numRows == 60
    assert data.inputNames == names
    for name in names:
        v = space.variable(name)
        bins = np.floor((data.column(name) - v.lower) / (v.upper - v.lower) * 60).astype(int)
        assert sorted(bins) == list(range(60))


def test_lhs_row_wise_d3():
    space = design_space.designBounds(studyDuty())
    data = design_space.lhsSample(space, ['D2', 'D3'], 25, 1)
    (lower, upper) = design_space.d3Bounds(data.column('D2'))
    assert np.all(data.column('D3') >= lower)
    assert np.all(data.column('D3') <= upper)


def test_lhs_deterministic():
    space = design_space.designBounds(studyDuty())
    a = design_space.lhsSample(space, ['D2', 'b2', 'beta2'], 10, 5)
    b = design_space.lhsSample(space, ['D2', 'b2', 'beta2'], 10, 5)
    c = design_space.lhsSample(space, ['D2', 'b2', 'beta2'], 10, 6)
    assert a == b
    assert not a == c


def test_lhs_errors():
    space = design_space.designBounds(studyDuty())
    with pytest.raises(DataError):
        design_space.lhsSample(space, ['D2'], 0, 1)
    with pytest.raises(DataError):
        design_space.lhsSample(space, ['D9'], 5, 1)
    with pytest.raises(DataError):
        design_space.lhsSample(space, [], 5, 1)


def test_space_save_load(tmp_path):
    space = design_space.designBounds(studyDuty())
    path = str(tmp_path / 'space.json')
    space.save(path)
    loaded = DesignSpace.load(path)
    assert loaded.variables == space.variables


def test_bad_space():
    with pytest.raises(DataError):
        DesignSpace([('x', 2.0, 1.0, '')])
    with pytest.raises(DataError):
        DesignSpace([('x', 0.0, 1.0, ''), ('x', 0.0, 2.0, '')])


def test_sensitivity_hand_case():
    space = DesignSpace([('x', 1.0, 3.0, ''), ('y', 1.0, 3.0, '')])
    oracle = lambda p: {'head': p['x'] ** 2, 'efficiency': 1.0 + 0 * p['y']}
    result = design_space.sensitivity(oracle, space, {'x': 2.0, 'y': 2.0})
    x = result.entry('x')
    assert x.eps['head'] == pytest.approx(2.02)
    assert x.eps['efficiency'] == 0
    assert x.aggregate == pytest.approx(2.02)
    assert result.entry('y').aggregate == 0
    assert result.ranking == ['x', 'y']
    assert not x.clamped


def test_sensitivity_clamps_at_bound():
    space = DesignSpace([('x', 1.0, 2.0, '')])
    oracle = lambda p: {'head': p['x'], 'efficiency': 1.0}
    result = design_space.sensitivity(oracle, space, {'x': 2.0})
    assert result.entry('x').clamped
    assert result.entry('x').eps['head'] == 0


def test_sensitivity_partial_clamp_uses_actual_step():
    space = DesignSpace([('x', 1.0, 2.01, '')])
    result = design_space.sensitivity(lambda p: {'head': p['x'], 'efficiency': 1.0}, space, {'x': 2.0})
    entry = result.entry('x')
    assert entry.clamped
    assert entry.step == pytest.approx(0.005)
    assert entry.eps['head'] == pytest.approx(1.0)
    assert result.toDict()['variables'][0]['step'] == entry.step


def test_sensitivity_linear_response():
    space = DesignSpace([('x1', 0.0, 100.0, ''), ('x2', 0.0, 100.0, ''), ('x3', 0.0, 100.0, '')])
    coefficients = {'x1': 1.5, 'x2': -2.0, 'x3': 0.5}
    defaults = {'x1': 10.0, 'x2': 20.0, 'x3': 30.0}
    linear = lambda p: sum(coefficients[k] * p[k] for k in coefficients)
    oracle = lambda p: {'head': linear(p), 'efficiency': 1.0}
    result = design_space.sensitivity(oracle, space, defaults)
    f0 = linear(defaults)
    for name in coefficients:
        assert abs(result.entry(name).eps['head'] - coefficients[name] * defaults[name] / f0) < 1e-12


def test_sensitivity_single_variable():
    space = DesignSpace([('x1', 0.0, 100.0, '')])
    result = design_space.sensitivity(lambda p: {'head': p['x1'], 'efficiency': 1.0}, space, {'x1': 10.0})
    assert abs(result.entry('x1').eps['head'] - 1.0) < 1e-12


def test_sensitivity_zero_response():
    space = DesignSpace([('x', 1.0, 3.0, '')])
    with pytest.raises(NumericalError):
        design_space.sensitivity(lambda p: {'head': 0.0, 'efficiency': 1.0}, space, {'x': 2.0})


def test_sensitivity_bad_aggregate():
    space = DesignSpace([('x', 1.0, 3.0, '')])
    with pytest.raises(DataError):
        design_space.sensitivity(lambda p: {'head': 1.0, 'efficiency': 1.0}, space, {'x': 2.0}, aggregate='mean')


def test_sensitivity_ranks_key_variables_first():
    oracle = pump_oracle.SyntheticPumpOracle(studyDuty(), noiseSigma=0.0)
    result = design_space.sensitivity(oracle, oracle.space, oracle.defaults)
    assert set(result.ranking[:3]) == {'D2', 'b2', 'beta2'}
    assert result.toDict()['ranking'] == result.ranking
