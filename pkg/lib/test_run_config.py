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

Test run_config

"""

import run_config
import settings
from study_errors import ConfigError

import os
import pytest

def writeYaml(tmp_path, text):
    path = str(tmp_path / 'run.yaml')
    with open(path, 'w') as f:
        f.write(text)
    return path


def test_defaults():
    config = run_config.loadConfig()
    assert config['seed'] == settings.defaultSeed
    assert config['variables'] == ['D2', 'b2', 'beta2']
    assert config['samples'] == {'train': 60, 'test': 10}
    assert sorted(config['models']) == ['krg', 'nn', 'rbf', 'rsf']


def test_load_yaml(tmp_path):
    path = writeYaml(tmp_path, 'seed: 3\nsamples: {train: 40}\nmodels:\n  rsf: {}\n  nn: {hidden: 8}\n')
    config = run_config.loadConfig(path)
    assert config['seed'] == 3
    assert config['samples'] == {'train': 40, 'test': 10}
    assert sorted(config['models']) == ['nn', 'rsf']
    assert config['models']['nn']['hidden'] == 8
    assert config['models']['nn']['epochs'] == 1000


def test_study_config_matches_defaults():
    path = os.path.join(settings.studyRoot, 'study.yaml')
    config = run_config.loadConfig(path)
    defaults = run_config.loadConfig()
    defaults['output_dir'] = 'full'
    assert run_config.digest(config) == run_config.digest(defaults)


@pytest.mark.parametrize('text', [
    'seeds: 3\n',
    'seed: three\n',
    'seed: true\n',
    'samples: {train: 0}\n',
    'split: {train: 0.5, val: 0.1, test: 0.1}\n',
    'variables: [D2, D2]\n',
    'variables: [D9]\n',
    'models: {svm: {}}\n',
    'models: {rbf: {kernel: cubic}}\n',
    'models: {rbf: {centers: many}}\n',
    'models: {rbf: {center_candidates: []}}\n',
    'models: {rbf: {center_candidates: [10, 0]}}\n',
    'models: {krg: {theta_bounds: [1, 0.1]}}\n',
    'augmentation: {interpolation_factor: 0.5}\n',
    'duty: {flow_m3h: 100}\n',
    'seed: [1\n',
])
def test_bad_configs(tmp_path, text):
    with pytest.raises(ConfigError):
        run_config.loadConfig(writeYaml(tmp_path, text))


def test_missing_file():
    with pytest.raises(ConfigError):
        run_config.loadConfig('/nonexistent/run.yaml')


def test_digest():
    config = run_config.loadConfig()
    digest = run_config.digest(config)
    assert len(digest) == 16
    assert digest == run_config.digest(run_config.loadConfig())
    assert digest != run_config.digest(run_config.applyOverrides(config, {'seed': 8}))


def test_overrides():
    config = run_config.loadConfig()
    changed = run_config.applyOverrides(config, {'seed': 11, 'samples.train': 30, 'output_dir': None})
    assert changed['seed'] == 11
    assert changed['samples']['train'] == 30
    assert changed['output_dir'] == config['output_dir']
    assert config['seed'] == settings.defaultSeed
    with pytest.raises(ConfigError):
        run_config.applyOverrides(config, {'samples.valid': 3})


def test_sub_seed():
    a = run_config.subSeed(7, 'split')
    assert a == run_config.subSeed(7, 'split')
    assert a != run_config.subSeed(7, 'nn')
    assert a != run_config.subSeed(8, 'split')
    assert 0 <= a < 2 ** 32


def test_output_dir_env(monkeypatch, tmp_path):
    config = run_config.loadConfig()
    monkeypatch.setenv(settings.outputRootEnvVar, str(tmp_path))
    assert run_config.outputDir(config) == os.path.join(str(tmp_path), 'study')
    monkeypatch.delenv(settings.outputRootEnvVar)
    assert run_config.outputDir(config) == os.path.join(settings.outputRoot, 'study')


def test_model_params():
    config = run_config.loadConfig()
    assert run_config.modelParams(config, 'rbf') == {'centers': 30, 'width_rule': 'median'}
    only = run_config.applyOverrides(config, {})
    del only['models']['krg']
    with pytest.raises(ConfigError):
        run_config.modelParams(only, 'krg')


def test_rbf_auto_centers(tmp_path):
    config = run_config.loadConfig(writeYaml(tmp_path, 'models: {rbf: {centers: auto, center_candidates: [5, 15]}}\n'))
    assert run_config.modelParams(config, 'rbf') == {'centers': 'auto', 'width_rule': 'median'}
    assert run_config.rbfCenterCandidates(config) == [5, 15]
    assert run_config.rbfCenterCandidates(run_config.loadConfig()) == [10, 20, 30]
