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

Run configuration: YAML file -> validated nested dict with every default
filled in, command line overrides, config digest and named seed streams.

"""

import os
import sys
studyRoot = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(studyRoot, 'lib'))
sys.path.insert(0, studyRoot)
import settings
settings.studyRoot = studyRoot
from study_errors import ConfigError
import augmentation
import design_space
import pump_dataset
import pump_oracle

import copy
import hashlib
import json
import logging
import numbers
import yaml

# keys whose default is None and accept a value of the listed types
NULLABLE = {
    ('duty', 'rated_power'): (numbers.Real,),
    ('models', 'rbf', 'centers'): (numbers.Integral,),
    ('models', 'rbf', 'width'): (numbers.Real,),
    ('models', 'krg', 'theta'): (numbers.Real, list),
}

# keys that also accept these literal values
ALTERNATIVES = {
    ('models', 'rbf', 'centers'): ('auto',),
}

REQUIRED_DUTY = ('flow_m3h', 'head', 'speed')


def defaultConfig():
    return {
        'duty': {'flow_m3h': settings.dutyFlowM3h, 'head': settings.dutyHead, 'speed': settings.dutySpeed,
                 'rated_power': settings.dutyRatedPower},
        'variables': list(settings.keyVariables),
        'objectives': list(settings.objectives),
        'samples': {'train': settings.trainSamples, 'test': settings.testSamples},
        'seed': settings.defaultSeed,
        'split': {'train': 0.8, 'val': 0.1, 'test': 0.1},
        'oracle': {'noise_sigma': 0.005, 'nonlinear_scale': 1.0, 'flow_ratio': 1.0},
        'models': {
            'rsf': {},
            'rbf': {'centers': 30, 'width_rule': 'median', 'width': None, 'center_candidates': [10, 20, 30]},
            'krg': {'theta_bounds': [0.01, 100.0], 'nugget': 1e-8, 'starts': 8, 'theta': None},
            'nn': {'hidden': 50, 'epochs': 1000, 'activation': 'tanh', 'joint': True, 'regularize': True,
                   'log_every': settings.nnLogEvery},
        },
        'augmentation': {'enabled': True, 'interpolation_factor': 0.025, 'pairing': 'plus_minus'},
        'output_dir': 'study',
    }


def typeMatches(value, default, path):
    if default is None:
        return isinstance(value, NULLABLE.get(path, ())) and not isinstance(value, bool)
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, numbers.Integral):
        return isinstance(value, numbers.Integral) and not isinstance(value, bool)
    if isinstance(default, numbers.Real):
        return isinstance(value, numbers.Real) and not isinstance(value, bool)
    return isinstance(value, type(default))


def merge(defaults, given, path=()):
    """defaults updated from given, rejecting unknown keys and ill-typed values"""
    if not isinstance(given, dict):
        raise ConfigError('%s must be a mapping' % ('.'.join(path) or 'config'))
    merged = copy.deepcopy(defaults)
    for key, value in given.items():
        keyPath = path + (key,)
        if key not in defaults:
            raise ConfigError('unknown config key ' + '.'.join(keyPath))
        if isinstance(defaults[key], dict) and defaults[key]:
            merged[key] = merge(defaults[key], value if value != None else {}, keyPath)
        elif value is None and (defaults[key] is None or keyPath in NULLABLE):
            merged[key] = None
        elif typeMatches(value, defaults[key], keyPath):
            merged[key] = value
        elif isinstance(value, str) and value in ALTERNATIVES.get(keyPath, ()):
            merged[key] = value
        else:
            raise ConfigError('config key %s has invalid value %r' % ('.'.join(keyPath), value))
    return merged


def mergeModels(given):
    """Only the listed model kinds run; each gets its defaults filled in"""
    defaults = defaultConfig()['models']
    if given == None:
        return defaults
    if not isinstance(given, dict) or not given:
        raise ConfigError('models must be a non-empty mapping of model kinds')
    merged = {}
    for kind, params in given.items():
        if kind not in defaults:
            raise ConfigError('unknown model kind %s, expected one of %s' % (kind, sorted(defaults)))
        merged[kind] = merge(defaults[kind], params if params != None else {}, ('models', kind))
    return merged


def validate(config):
    """Semantic checks of a merged config; raises ConfigError"""
    try:
        design_space.makeDuty(config['duty']['flow_m3h'], config['duty']['head'], config['duty']['speed'],
                              config['duty']['rated_power'])
        pump_dataset.SplitSpec(config['split']['train'], config['split']['val'], config['split']['test'],
                               config['seed']).validate()
        augmentation.AugmentConfig(config['augmentation']['interpolation_factor'],
                                   config['augmentation']['pairing']).validate()
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e))
    space = design_space.designBounds(design_space.makeDuty(config['duty']['flow_m3h'], config['duty']['head'], config['duty']['speed']))
    if not all(isinstance(n, str) for n in config['variables'] + config['objectives']):
        raise ConfigError('variables and objectives must be lists of names')
    if not config['variables'] or len(set(config['variables'])) != len(config['variables']):
        raise ConfigError('variables must be a non-empty list of distinct names')
    for name in config['variables']:
        if name not in space.names:
            raise ConfigError('unknown design variable %s, expected some of %s' % (name, space.names))
    for name in config['objectives']:
        if name not in pump_oracle.OUTPUTS:
            raise ConfigError('unknown objective %s, expected some of %s' % (name, pump_oracle.OUTPUTS))
    for key in ('train', 'test'):
        if config['samples'][key] < 1:
            raise ConfigError('samples.%s must be positive' % key)
    if config['oracle']['noise_sigma'] < 0 or not config['oracle']['flow_ratio'] > 0:
        raise ConfigError('oracle noise_sigma must be >= 0 and flow_ratio > 0')
    models = config['models']
    if 'rbf' in models:
        if models['rbf']['width_rule'] not in ('median', 'nearest', 'fixed'):
            raise ConfigError('unknown models.rbf.width_rule %s' % models['rbf']['width_rule'])
        centers = models['rbf']['centers']
        if centers != None and centers != 'auto' and centers < 1:
            raise ConfigError('models.rbf.centers must be positive or auto')
        candidates = models['rbf']['center_candidates']
        if not candidates or not all(isinstance(c, numbers.Integral) and not isinstance(c, bool) and c > 0 for c in candidates):
            raise ConfigError('models.rbf.center_candidates must be a non-empty list of positive counts')
    if 'krg' in models:
        bounds = models['krg']['theta_bounds']
        if len(bounds) != 2 or not all(isinstance(b, numbers.Real) for b in bounds) or not (0 < bounds[0] < bounds[1]):
            raise ConfigError('models.krg.theta_bounds must be [lower, upper] with 0 < lower < upper')
        if models['krg']['nugget'] < 0:
            raise ConfigError('models.krg.nugget must be nonnegative')
        theta = models['krg']['theta']
        if theta != None:
            theta = theta if isinstance(theta, list) else [theta]
            if len(theta) not in (1, len(config['variables'])) or not all(isinstance(t, numbers.Real) and t > 0 for t in theta):
                raise ConfigError('models.krg.theta must be positive, one value or one per variable')
    if 'nn' in models:
        if models['nn']['hidden'] < 1 or models['nn']['epochs'] < 1:
            raise ConfigError('models.nn.hidden and models.nn.epochs must be positive')
        if models['nn']['activation'] not in ('tanh', 'logistic'):
            raise ConfigError('unknown models.nn.activation %s' % models['nn']['activation'])
    return config


def buildConfig(given):
    given = dict(given or {})
    models = given.pop('models', None)
    if 'duty' in given and given['duty'] != None:
        missing = [k for k in REQUIRED_DUTY if k not in given['duty']]
        if missing:
            raise ConfigError('duty needs %s' % ', '.join(missing))
    config = merge(defaultConfig(), given)
    config['models'] = mergeModels(models)
    return validate(config)


def loadConfig(path=None):
    """Validated run config from a YAML file (defaults only when path is None)"""
    if path == None:
        return buildConfig({})
    try:
        with open(path, 'r') as f:
            given = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError('cannot read config %s: %s' % (path, e))
    except yaml.YAMLError as e:
        raise ConfigError('bad YAML in %s: %s' % (path, e))
    config = buildConfig(given)
    logging.warning('Loaded config %s (digest %s)', path, digest(config))
    return config


def applyOverrides(config, overrides):
    """Config with dotted-path overrides (e.g. {'seed': 3, 'samples.train': 40}) applied and revalidated"""
    given = copy.deepcopy(config)
    for dotted, value in overrides.items():
        if value is None:
            continue
        keys = dotted.split('.')
        node = given
        for key in keys[:-1]:
            if not isinstance(node.get(key), dict):
                raise ConfigError('cannot override %s' % dotted)
            node = node[key]
        node[keys[-1]] = value
    return buildConfig(given)


def canonicalJson(config):
    return json.dumps(config, sort_keys=True, separators=(',', ':'))


def digest(config):
    """First 16 hex digits of the SHA-256 of the canonical config JSON"""
    return hashlib.sha256(canonicalJson(config).encode('utf-8')).hexdigest()[:16]


def subSeed(seed, name):
    """32 bit seed of the named random stream derived from the run seed"""
    return int.from_bytes(hashlib.sha256(('%s:%s' % (seed, name)).encode('utf-8')).digest()[:4], 'big')


def header(config):
    return {'digest': digest(config), 'seed': config['seed']}


def outputDir(config):
    root = os.environ.get(settings.outputRootEnvVar) or settings.outputRoot
    return os.path.join(root, config['output_dir'])


def duty(config):
    d = config['duty']
    return design_space.makeDuty(d['flow_m3h'], d['head'], d['speed'], d['rated_power'])


def designSpace(config):
    return design_space.designBounds(duty(config))


def splitSpec(config):
    s = config['split']
    return pump_dataset.SplitSpec(s['train'], s['val'], s['test'], subSeed(config['seed'], 'split'))


def oracle(config, streamName='data'):
    """Synthetic oracle whose noise seed follows the named sample set"""
    o = config['oracle']
    return pump_oracle.SyntheticPumpOracle(duty(config), o['noise_sigma'], subSeed(config['seed'], 'oracle:' + streamName),
                                          o['nonlinear_scale'], o['flow_ratio'])


def augmentConfig(config):
    a = config['augmentation']
    return augmentation.AugmentConfig(a['interpolation_factor'], a['pairing'], subSeed(config['seed'], 'augment'))


def modelParams(config, kind):
    """Hyperparameters of one model kind in the form surrogate.fitSurrogate takes"""
    if kind not in config['models']:
        raise ConfigError('model %s is not enabled in the config' % kind)
    params = dict(config['models'][kind])
    params.pop('center_candidates', None)
    return {k: v for k, v in params.items() if v is not None}


def rbfCenterCandidates(config):
    """Center counts tried when models.rbf.centers is auto"""
    return list(config['models'].get('rbf', defaultConfig()['models']['rbf'])['center_candidates'])
