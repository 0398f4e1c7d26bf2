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

Analytic stand-in for the CFD runs: smooth head, power and efficiency of a
pump stage as functions of the design variables.  Everything downstream
(sampling, surrogate fits, comparison) only needs some oracle, so the CFD
solver is replaced by this closed form.

Functional form.  With (lo, hi) the design-variable ranges at the duty point,
key variables D2, b2, beta2 enter through u = (x - mid) / half in [-1, 1];
every other variable enters through r = x / mid - 1 (both relative to the
range midpoint mid and half width half):

    head  = H  * (1 + qH(u) + sum_k cH[k] r_k) + s * H  * 0.012 * sin(pi u_D2) * cos(pi u_beta2 / 2)
    power = P0 * (1 + qP(u) + sum_k cP[k] r_k) + s * P0 * 0.015 * tanh(2 u_b2) * (1 + 0.5 u_beta2)
    efficiency = 100 * rho g Q head / (1000 power)

where H is the duty head, P0 = rho g Q H / (1000 * 0.76) [kW], s the
nonlinear scale (0 leaves a pure quadratic in the key variables) and qH, qP
full quadratics with the coefficients in HEAD_QUADRATIC / POWER_QUADRATIC
(order: u_D2, u_b2, u_beta2, u_D2^2, u_b2^2, u_beta2^2, u_D2 u_b2,
u_D2 u_beta2, u_b2 u_beta2).  Off-design flow ratio q multiplies head by
(1.15 - 0.15 q^2), power by (0.45 + 0.55 q) and uses q Q in the efficiency.

Noise, if enabled, multiplies head and power by (1 + sigma N(0, 1)) with an
independent stream per call index.

"""

from study_errors import DataError
import design_space
import pump_dataset

import collections
import logging
import math
import numpy as np

RHO = 1000.0
GRAVITY = 9.81
REFERENCE_EFFICIENCY = 0.76

KEY_VARIABLES = ('D2', 'b2', 'beta2')

HEAD_QUADRATIC = (0.066, 0.030, 0.040, 0.004, -0.012, -0.015, 0.006, 0.005, -0.008)
POWER_QUADRATIC = (0.100, 0.045, 0.020, 0.006, -0.008, -0.010, 0.004, 0.003, 0.002)

# linear weights of the minor variables: (head, power)
MINOR_COEFFICIENTS = {
    'Z': (0.04, 0.03),
    'beta1': (0.02, -0.01),
    'Ds': (-0.03, -0.01),
    'Dh': (-0.02, 0.0),
    'phi': (0.03, 0.05),
    'theta': (-0.01, 0.01),
    'D3': (-0.04, -0.02),
    'Y': (0.05, 0.02),
}

OUTPUTS = ('head', 'power', 'efficiency')
OUTPUT_UNITS = {'head': 'm', 'power': 'kW', 'efficiency': '%'}

OracleResponse = collections.namedtuple('OracleResponse', ['head', 'power', 'efficiency', 'extrapolated'])


def quadraticTerms(u):
    (d, b, beta) = u
    return (d, b, beta, d * d, b * b, beta * beta, d * b, d * beta, b * beta)


class SyntheticPumpOracle(object):
    """Closed-form head/power/efficiency of one pump stage"""

    # no shared mutable state; safe for concurrent evaluate() calls
    reentrant = True

    def __init__(self, duty, noiseSigma=0.005, seed=0, nonlinearScale=1.0, flowRatio=1.0):
        """
        Args:
            duty (DutyPoint): design duty point, flow in m^3/s
            noiseSigma (float): relative sigma of multiplicative Gaussian noise
            seed (int): seed of the noise streams
            nonlinearScale (float): weight of the non-quadratic terms
            flowRatio (float): operating flow as a fraction of the design flow
        """
        if noiseSigma < 0 or not math.isfinite(noiseSigma):
            raise DataError('noise sigma must be nonnegative')
        if not flowRatio > 0:
            raise DataError('flow ratio must be positive')
        self.duty = duty
        self.noiseSigma = noiseSigma
        self.seed = seed
        self.nonlinearScale = nonlinearScale
        self.flowRatio = flowRatio
        self.space = design_space.designBounds(duty)
        self.defaults = self.space.midpoint()
        self.referencePower = RHO * GRAVITY * duty.Q * duty.H / (1000.0 * REFERENCE_EFFICIENCY)

    def describe(self):
        return {'noise_sigma': self.noiseSigma, 'seed': self.seed,
                'nonlinear_scale': self.nonlinearScale, 'flow_ratio': self.flowRatio}

    def inRanges(self, x):
        """True when every value lies in its range, D3 relative to this point's D2"""
        (d3Lower, d3Upper) = design_space.d3Bounds(x['D2'])
        if not d3Lower <= x['D3'] <= d3Upper:
            return False
        return all(self.space.contains(name, x[name]) for name in x if name != 'D3')

    def _noiseFactors(self, callIndex):
        if self.noiseSigma == 0:
            return (1.0, 1.0)
        rng = np.random.default_rng([self.seed, callIndex])
        draws = rng.standard_normal(2)
        return (1.0 + self.noiseSigma * draws[0], 1.0 + self.noiseSigma * draws[1])

    def evaluate(self, point, callIndex=0):
        """Performance of one design point

        Args:
            point (dict): design variable name -> value; missing variables take
                          the midpoint of their range
            callIndex (int): index selecting the noise stream

        Returns:
            OracleResponse (head m, power kW, efficiency %, extrapolated flag)
        """
        x = dict(self.defaults)
        for name, value in point.items():
            if name not in x:
                raise DataError('unknown design variable ' + name)
            value = float(value)
            if not math.isfinite(value):
                raise DataError('non-finite value for ' + name)
            x[name] = value
        extrapolated = not self.inRanges(x)

        u = []
        for name in KEY_VARIABLES:
            v = self.space.variable(name)
            half = (v.upper - v.lower) / 2.0
            u.append((x[name] - self.defaults[name]) / half)
        terms = quadraticTerms(u)
        headCore = 1.0 + sum(c * t for (c, t) in zip(HEAD_QUADRATIC, terms))
        powerCore = 1.0 + sum(c * t for (c, t) in zip(POWER_QUADRATIC, terms))
        for name, (cHead, cPower) in MINOR_COEFFICIENTS.items():
            r = x[name] / self.defaults[name] - 1.0
            headCore += cHead * r
            powerCore += cPower * r

        (uD, uB, uBeta) = u
        head = self.duty.H * headCore
        head += self.nonlinearScale * self.duty.H * 0.012 * math.sin(math.pi * uD) * math.cos(math.pi * uBeta / 2.0)
        power = self.referencePower * powerCore
        power += self.nonlinearScale * self.referencePower * 0.015 * math.tanh(2.0 * uB) * (1.0 + 0.5 * uBeta)

        q = self.flowRatio
        head *= 1.15 - 0.15 * q * q
        power *= 0.45 + 0.55 * q
        (headNoise, powerNoise) = self._noiseFactors(callIndex)
        head *= headNoise
        power *= powerNoise
        efficiency = 100.0 * RHO * GRAVITY * q * self.duty.Q * head / (1000.0 * power)
        return OracleResponse(head, power, efficiency, extrapolated)

    def __call__(self, point):
        return self.evaluate(point)._asdict()

    def evaluateDataset(self, inputs, outputs=('head', 'power')):
        """Fill in oracle outputs for every row of an input dataset

        Row i uses noise stream i, so results do not depend on evaluation order.

        Args:
            inputs (Dataset): design points (input attributes are used)
            outputs (tuple): names of the oracle outputs to append

        Returns:
            Dataset with the input attributes followed by the outputs
        """
        for o in outputs:
            if o not in OUTPUTS:
                raise DataError('unknown oracle output ' + o)
        names = inputs.inputNames
        rows = []
        numExtrapolated = 0
        for i, values in enumerate(inputs.columns(names)):
            response = self.evaluate(dict(zip(names, values)), callIndex=i)
            numExtrapolated += response.extrapolated
            rows.append(list(values) + [getattr(response, o) for o in outputs])
        if numExtrapolated:
            logging.warning('%d of %d points are outside the design ranges', numExtrapolated, inputs.numRows)
        attributes = [a for a in inputs.attributes if a.kind == pump_dataset.INPUT]
        attributes += [pump_dataset.AttributeSpec(o, pump_dataset.OUTPUT, OUTPUT_UNITS[o]) for o in outputs]
        return pump_dataset.Dataset(attributes, rows, inputs.metadata)
