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

Pump duty point, specific speed, the design-variable ranges derived from the
duty point, Latin Hypercube sampling inside those ranges and the one-at-a-time
sensitivity screen of design variables.

Flow is always in m^3/s inside this module; use flowFromCubicMetersPerHour()
for catalog values given in m^3/h.

"""

from study_errors import DataError, NumericalError
import pump_dataset

import collections
import json
import logging
import math
import numpy as np
from scipy.stats import qmc

DutyPoint = collections.namedtuple('DutyPoint', ['Q', 'H', 'n', 'ratedPower'])
DutyPoint.__new__.__defaults__ = (None,)

DesignVariable = collections.namedtuple('DesignVariable', ['name', 'lower', 'upper', 'unit'])

# duty point of the studied 10-stage pump (head per stage) and of the
# single stage HPB40 pump used to validate the numerical model
STUDY_DUTY = ('study', 100.0, 80.0, 2950.0, 355.0)
HPB40_DUTY = ('hpb40', 10.0, 45.0, 2900.0, None)

# order of the variables in designBounds()
VARIABLE_ORDER = ['Z', 'beta1', 'beta2', 'D2', 'b2', 'Ds', 'Dh', 'phi', 'theta', 'D3', 'Y']


def flowFromCubicMetersPerHour(flowM3h):
    return flowM3h / 3600.0


def dutyPreset(name):
    """Duty point presets by name ('study' or 'hpb40') with flow in m^3/s"""
    for preset in (STUDY_DUTY, HPB40_DUTY):
        if preset[0] == name:
            return makeDuty(preset[1], preset[2], preset[3], preset[4])
    raise DataError('unknown duty preset ' + name)


def makeDuty(flowM3h, head, speed, ratedPower=None):
    duty = DutyPoint(flowFromCubicMetersPerHour(flowM3h), head, speed, ratedPower)
    checkDuty(duty)
    return duty


def checkDuty(duty):
    for (field, value) in (('Q', duty.Q), ('H', duty.H), ('n', duty.n)):
        if not (value > 0 and math.isfinite(value)):
            raise DataError('duty point %s must be positive, got %s' % (field, value))


def specificSpeed(duty):
    """Specific speed n_s = 3.65 n sqrt(Q) / H^(3/4), Q in m^3/s, n in r/min"""
    checkDuty(duty)
    return 3.65 * duty.n * math.sqrt(duty.Q) / duty.H ** 0.75


class DesignSpace(object):
    """Ordered closed bounds of the design variables"""

    def __init__(self, variables):
        self.variables = [DesignVariable(*v) for v in variables]
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise DataError('duplicate design variable in ' + ','.join(names))
        for v in self.variables:
            if not (math.isfinite(v.lower) and math.isfinite(v.upper)) or not (v.lower < v.upper):
                raise DataError('bad bounds for %s: [%s, %s]' % (v.name, v.lower, v.upper))

    @property
    def names(self):
        return [v.name for v in self.variables]

    def variable(self, name):
        for v in self.variables:
            if v.name == name:
                return v
        raise DataError('unknown design variable ' + name)

    def midpoint(self):
        return collections.OrderedDict((v.name, (v.lower + v.upper) / 2.0) for v in self.variables)

    def contains(self, name, value):
        v = self.variable(name)
        return v.lower <= value <= v.upper

    def toDict(self):
        return {'variables': [{'name': v.name, 'lo': v.lower, 'hi': v.upper, 'unit': v.unit}
                              for v in self.variables]}

    @staticmethod
    def fromDict(d):
        return DesignSpace([(v['name'], float(v['lo']), float(v['hi']), v.get('unit', ''))
                            for v in d['variables']])

    def save(self, path):
        with open(path, 'w') as f:
            json.dump(self.toDict(), f, indent=2, sort_keys=True)
            f.write('\n')

    @staticmethod
    def load(path):
        try:
            with open(path, 'r') as f:
                return DesignSpace.fromDict(json.load(f))
        except (OSError, ValueError, KeyError) as e:
            raise DataError('cannot read design space %s: %s' % (path, e))


def d3Bounds(d2):
    """Volute base diameter range for a given impeller outlet diameter"""
    return (1.03 * d2, 1.06 * d2)


def designBounds(duty, d2=None):
    """Design-variable ranges for the given duty point

    Args:
        duty (DutyPoint): flow in m^3/s, head in m, speed in r/min
        d2 (float): impeller outlet diameter used for the D3 range
                    (default: midpoint of the D2 range)

    Returns:
        DesignSpace with Z, beta1, beta2, D2, b2, Ds, Dh, phi, theta, D3, Y
    """
    ns = specificSpeed(duty)
    cubeRoot = (duty.Q / duty.n) ** (1.0 / 3.0)
    d2Lower = 10.4 * (ns / 100.0) ** -0.5 * cubeRoot
    d2Upper = 11.1 * (ns / 100.0) ** -0.5 * cubeRoot
    if d2 == None:
        d2 = (d2Lower + d2Upper) / 2.0
    (d3Lower, d3Upper) = d3Bounds(d2)
    variables = [
        ('Z', 3.0, 7.0, 'blades'),
        ('beta1', 10.0, 35.0, 'deg'),
        ('beta2', 14.0, 24.0, 'deg'),
        ('D2', d2Lower, d2Upper, 'm'),
        ('b2', 0.85 * (ns / 100.0) ** (5.0 / 6.0) * cubeRoot, 1.2 * (ns / 100.0) ** (5.0 / 6.0) * cubeRoot, 'm'),
        ('Ds', 12.0 * cubeRoot, 15.0 * cubeRoot, 'm'),
        ('Dh', 8.5 * cubeRoot, 11.7 * cubeRoot, 'm'),
        ('phi', 140.0, 180.0, 'deg'),
        ('theta', 18.0, 28.0, 'deg'),
        ('D3', d3Lower, d3Upper, 'm'),
        ('Y', 0.8, 2.0, ''),
    ]
    return DesignSpace(variables)


def lhsSample(space, subset, count, seed):
    """Latin Hypercube sample of the given variables

    Each variable range is cut into count equal bins with exactly one sample
    per bin, placed uniformly inside the bin.  When both D2 and D3 are
    sampled, the D3 range of each row follows that row's D2 value.

    Args:
        space (DesignSpace): variable bounds
        subset (list): names of the variables to sample
        count (int): number of samples
        seed (int): random seed

    Returns:
        Dataset of input attributes only
    """
    if not subset:
        raise DataError('no design variables to sample')
    if count < 1:
        raise DataError('sample count must be positive, got %d' % count)
    variables = [space.variable(name) for name in subset]
    sampler = qmc.LatinHypercube(d=len(variables), seed=np.random.default_rng(seed))
    unit = sampler.random(count)
    samples = np.empty_like(unit)
    for j, v in enumerate(variables):
        samples[:, j] = v.lower + unit[:, j] * (v.upper - v.lower)
    if 'D2' in subset and 'D3' in subset:
        d2 = samples[:, subset.index('D2')]
        (lower, upper) = d3Bounds(d2)
        k = subset.index('D3')
        samples[:, k] = lower + unit[:, k] * (upper - lower)
    attributes = [pump_dataset.AttributeSpec(v.name, pump_dataset.INPUT, v.unit) for v in variables]
    return pump_dataset.Dataset(attributes, samples, {'seed': seed})


SensitivityEntry = collections.namedtuple('SensitivityEntry', ['name', 'eps', 'aggregate', 'clamped', 'step'])


class SensitivityResult(collections.namedtuple('SensitivityResult', ['entries', 'ranking', 'outputs', 'aggregateRule', 'perturbation'])):
    """Relative sensitivities of each probed design variable"""

    def entry(self, name):
        for e in self.entries:
            if e.name == name:
                return e
        raise DataError('variable %s was not probed' % name)

    def toDict(self):
        return {
            'perturbation': self.perturbation,
            'aggregate': self.aggregateRule,
            'outputs': list(self.outputs),
            'ranking': list(self.ranking),
            'variables': [{'name': e.name, 'eps': dict(e.eps), 'aggregate': e.aggregate, 'clamped': e.clamped,
                           'step': e.step}
                          for e in self.entries],
        }


AGGREGATES = {
    'max': lambda values: max(abs(v) for v in values),
    'sum': lambda values: sum(abs(v) for v in values),
}


def probe(oracle, point, outputs, label):
    try:
        response = oracle(point)
        values = [float(response[o]) for o in outputs]
    except Exception as e:
        raise NumericalError('oracle failed at %s probe: %s' % (label, e))
    if not all(math.isfinite(v) for v in values):
        raise NumericalError('oracle returned non-finite value at %s probe' % label)
    return values


def sensitivity(oracle, space, defaults, perturbation=0.02, outputs=('efficiency', 'head'), aggregate='max'):
    """One-sided relative sensitivity of each design variable

    eps = ((f1 - f0) / f0) / perturbation where f1 is the response after one
    variable is increased by the perturbation ratio and all others stay at
    their defaults.  A perturbed value beyond the upper bound is clamped and
    flagged; its eps is divided by the relative step actually taken (0 when
    the default already sits on the bound).

    Args:
        oracle (callable): design point dict -> mapping with the output names
        space (DesignSpace): bounds of the probed variables
        defaults (dict): default design point, every value inside its bounds
        perturbation (float): relative increase of each variable
        outputs (tuple): response names to evaluate
        aggregate (str): 'max' or 'sum' of absolute eps used for ranking

    Returns:
        SensitivityResult
    """
    if aggregate not in AGGREGATES:
        raise DataError('unknown aggregate %s, expected one of %s' % (aggregate, sorted(AGGREGATES)))
    if not perturbation > 0:
        raise DataError('perturbation must be positive')
    for name in space.names:
        if name not in defaults:
            raise DataError('no default value for %s' % name)
        if not space.contains(name, defaults[name]):
            raise DataError('default %s=%s outside bounds' % (name, defaults[name]))

    point = dict(defaults)
    f0 = probe(oracle, point, outputs, 'central')
    for (o, value) in zip(outputs, f0):
        if value == 0:
            raise NumericalError('central %s value is zero' % o)

    entries = []
    for v in space.variables:
        perturbed = dict(point)
        target = defaults[v.name] * (1.0 + perturbation)
        clamped = not (v.lower <= target <= v.upper)
        if clamped:
            logging.warning('Perturbed %s=%f outside [%f, %f], clamping', v.name, target, v.lower, v.upper)
            target = min(max(target, v.lower), v.upper)
        perturbed[v.name] = target
        step = target / defaults[v.name] - 1.0 if clamped else perturbation
        f1 = probe(oracle, perturbed, outputs, v.name)
        if step == 0:
            eps = collections.OrderedDict((o, 0.0) for o in outputs)
        else:
            eps = collections.OrderedDict((o, ((b - a) / a) / step) for (o, a, b) in zip(outputs, f0, f1))
        entries.append(SensitivityEntry(v.name, eps, AGGREGATES[aggregate](eps.values()), clamped, step))

    ranking = [e.name for e in sorted(entries, key=lambda e: -e.aggregate)]
    logging.warning('Sensitivity ranking: %s', ', '.join(ranking))
    return SensitivityResult(entries, ranking, tuple(outputs), aggregate, perturbation)
