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

Test replicate_study

"""

import replicate_study


def measured(nn, nnda, nnMean, closedForm):
    return {'nn_rmse': nn, 'nnda_rmse': nnda, 'nn_mean_error': nnMean, 'closed_form_mean_error': closedForm}


def test_every_objective_checked():
    seeds = [1, 2, 3, 4, 5]
    outcomes = [
        {'head': measured(1.0, 0.9, 0.5, 0.6), 'power': measured(1.0, 1.2, 0.7, 0.6)},
        {'head': measured(1.0, 0.8, 0.5, 0.6), 'power': measured(1.0, 1.1, 0.5, 0.6)},
        {'head': measured(1.0, 1.0, 0.9, 0.6), 'power': measured(1.0, 3.0, 0.8, 0.6)},
        {'head': measured(1.0, 0.7, 0.5, 0.6), 'power': measured(1.0, 4.0, 0.9, 0.6)},
        {'error': 'eigenvalues did not converge'},
    ]
    checks = replicate_study.summarizeOutcomes(seeds, outcomes, ['head', 'power'])
    assert list(checks) == ['nnda_head', 'nn_mean_error_head', 'nnda_power', 'nn_mean_error_power', 'failed_seeds']
    assert checks['nnda_head'] == {'rate': 0.8, 'passed_seeds': [1, 2, 3, 4], 'ok': True}
    assert checks['nn_mean_error_head']['passed_seeds'] == [1, 2, 4]
    assert checks['nn_mean_error_head']['ok']
    assert checks['nnda_power'] == {'rate': 0.0, 'passed_seeds': [], 'ok': False}
    assert checks['nn_mean_error_power'] == {'rate': 0.2, 'passed_seeds': [2], 'ok': False}
    assert checks['failed_seeds'] == [5]


def test_pass_rate_threshold():
    outcomes = [{'head': measured(1.0, 0.9, 0.5, 0.6)}, {'head': measured(1.0, 1.1, 0.7, 0.6)}]
    assert not replicate_study.summarizeOutcomes([1, 2], outcomes, ['head'])['nnda_head']['ok']
    assert replicate_study.summarizeOutcomes([1, 2], outcomes, ['head'], passRate=0.5)['nnda_head']['ok']
