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

Single hidden layer feedforward network

    I_j = sum_i w_ji y_i + beta_j       y_j = f_h(I_j)
    I_o = sum_j w_oj y_j + alpha_o      y_o = I_o           (linear output)

trained by Levenberg-Marquardt on F = beta E_D + alpha E_W, with alpha and
beta re-estimated after every accepted step from the evidence framework
(Bayesian regularization).

Flat parameter vector order: w_ji (row-major), beta_j, w_oj (row-major),
alpha_o.  Residuals are e = outputs - targets, sample-major.

"""

from study_errors import DataError, NumericalError

import collections
import logging
import math
import numpy as np
import scipy.linalg
from scipy.special import expit

ACTIVATIONS = ('tanh', 'logistic')

MlpTopology = collections.namedtuple('MlpTopology', ['numInputs', 'numHidden', 'numOutputs', 'activation'])
MlpTopology.__new__.__defaults__ = ('tanh',)

MlpWeights = collections.namedtuple('MlpWeights', ['inputWeights', 'hiddenThresholds', 'outputWeights', 'outputThresholds'])


def checkTopology(topology):
    for (field, value) in zip(topology._fields[:3], topology[:3]):
        if not (isinstance(value, (int, np.integer)) and value >= 1):
            raise DataError('topology %s must be a positive integer, got %s' % (field, value))
    if topology.activation not in ACTIVATIONS:
        raise DataError('unknown activation %s, expected one of %s' % (topology.activation, ACTIVATIONS))


def numParameters(topology):
    (n, h, o) = topology[:3]
    return h * n + h + o * h + o


def flatten(weights):
    return np.concatenate([weights.inputWeights.ravel(), weights.hiddenThresholds,
                           weights.outputWeights.ravel(), weights.outputThresholds])


def unflatten(topology, vector):
    (n, h, o) = topology[:3]
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (numParameters(topology),):
        raise DataError('expected %d parameters, got %s' % (numParameters(topology), vector.shape))
    offsets = np.cumsum([h * n, h, o * h])
    (wIn, bHidden, wOut, bOut) = np.split(vector, offsets)
    return MlpWeights(wIn.reshape(h, n), bHidden, wOut.reshape(o, h), bOut)


def initWeights(topology, seed):
    """Every weight and threshold i.i.d. uniform in [-1, 1]"""
    checkTopology(topology)
    rng = np.random.default_rng(seed)
    return unflatten(topology, rng.uniform(-1.0, 1.0, numParameters(topology)))


def activate(activation, I):
    if activation == 'tanh':
        return np.tanh(I)
    return expit(I)


def activationSlope(activation, y):
    """f'(I) expressed through y = f(I)"""
    if activation == 'tanh':
        return 1.0 - y * y
    return y * (1.0 - y)


def forwardPass(topology, weights, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != topology.numInputs:
        raise DataError('expected %d inputs, got %d' % (topology.numInputs, X.shape[1]))
    hidden = activate(topology.activation, X.dot(weights.inputWeights.T) + weights.hiddenThresholds)
    outputs = hidden.dot(weights.outputWeights.T) + weights.outputThresholds
    return (hidden, outputs)


def forward(topology, weights, X):
    """Network outputs (N x numOutputs) for normalized inputs X (N x numInputs)"""
    return forwardPass(topology, weights, X)[1]


def residuals(topology, weights, X, T):
    return (forward(topology, weights, X) - T).ravel()


def jacobian(topology, weights, X, hidden=None):
    """d outputs / d parameters, one row per (sample, output) pair in sample-major order"""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    (n, h, o) = topology[:3]
    if hidden is None:
        hidden = forwardPass(topology, weights, X)[0]
    slope = activationSlope(topology.activation, hidden)
    numRows = X.shape[0]
    J = np.zeros((numRows, o, numParameters(topology)))
    hiddenOffset = h * n
    outputOffset = hiddenOffset + h
    thresholdOffset = outputOffset + o * h
    for k in range(o):
        local = slope * weights.outputWeights[k]
        J[:, k, :hiddenOffset] = (local[:, :, None] * X[:, None, :]).reshape(numRows, h * n)
        J[:, k, hiddenOffset:outputOffset] = local
        J[:, k, outputOffset + k * h:outputOffset + (k + 1) * h] = hidden
        J[:, k, thresholdOffset + k] = 1.0
    return J.reshape(numRows * o, -1)


def objective(topology, vector, X, T, alpha, beta):
    e = residuals(topology, unflatten(topology, vector), X, T)
    return beta * e.dot(e) + alpha * vector.dot(vector)


def gradient(topology, vector, X, T, alpha, beta):
    """Gradient of F = beta E_D + alpha E_W by reverse accumulation

    Args:
        topology (MlpTopology): network shape
        vector (array): flat parameters
        X (array): N x numInputs normalized inputs
        T (array): N x numOutputs normalized targets
        alpha (float): weight decay coefficient
        beta (float): data error coefficient

    Returns:
        flat gradient, same layout as the parameters
    """
    weights = unflatten(topology, vector)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        raise DataError('gradient of an empty batch')
    (hidden, outputs) = forwardPass(topology, weights, X)
    dOutputs = 2.0 * beta * (outputs - T)
    dOutputWeights = dOutputs.T.dot(hidden)
    dOutputThresholds = dOutputs.sum(axis=0)
    dHidden = dOutputs.dot(weights.outputWeights) * activationSlope(topology.activation, hidden)
    dInputWeights = dHidden.T.dot(X)
    dHiddenThresholds = dHidden.sum(axis=0)
    dData = flatten(MlpWeights(dInputWeights, dHiddenThresholds, dOutputWeights, dOutputThresholds))
    return dData + 2.0 * alpha * vector


class TrainConfig(collections.namedtuple('TrainConfig', ['maxEpochs', 'muInit', 'muIncrease', 'muDecrease', 'muMax',
                                                         'gradientTolerance', 'performanceGoal', 'regularize', 'seed', 'logEvery'])):
    """Levenberg-Marquardt / Bayesian regularization settings"""

    def validate(self):
        if not (isinstance(self.maxEpochs, (int, np.integer)) and self.maxEpochs >= 1):
            raise DataError('max epochs must be a positive integer')
        if not self.muInit > 0 or not self.muMax >= self.muInit:
            raise DataError('mu must satisfy 0 < muInit <= muMax')
        if not self.muIncrease > 1 or not (0 < self.muDecrease < 1):
            raise DataError('mu increase factor must be > 1 and decrease factor in (0, 1)')

TrainConfig.__new__.__defaults__ = (1000, 1e-3, 10.0, 0.1, 1e10, 1e-7, 0.0, True, 0, 100)

EpochRecord = collections.namedtuple('EpochRecord', ['epoch', 'performance', 'dataError', 'weightError', 'gradientNorm',
                                                     'mu', 'gamma', 'alpha', 'beta', 'trainMse', 'valMse', 'rose', 'betaKept'])


class TrainReport(object):
    """Per-epoch training history plus the final fit summary"""

    def __init__(self, numParameters, numTargets):
        self.numParameters = numParameters
        self.numTargets = numTargets
        self.epochs = []
        self.stopReason = None
        self.bestMse = math.inf
        self.bestEpoch = 0
        self.regression = []

    def record(self, entry):
        if self.epochs and entry.performance > self.epochs[-1].performance:
            entry = entry._replace(rose=True)
        self.epochs.append(entry)
        if entry.trainMse < self.bestMse:
            self.bestMse = entry.trainMse
            self.bestEpoch = entry.epoch

    @property
    def finalMse(self):
        return self.epochs[-1].trainMse

    @property
    def finalPerformance(self):
        return self.epochs[-1].performance

    def toDict(self):
        return {
            'numParameters': self.numParameters,
            'numTargets': self.numTargets,
            'stopReason': self.stopReason,
            'bestMse': self.bestMse,
            'bestEpoch': self.bestEpoch,
            'regression': self.regression,
            'epochs': [dict(e._asdict()) for e in self.epochs],
        }


def regressionR(outputs, targets):
    """Correlation of outputs and targets per output column (None if undefined)"""
    values = []
    for k in range(targets.shape[1]):
        (a, b) = (outputs[:, k], targets[:, k])
        if np.std(a) == 0 or np.std(b) == 0:
            values.append(None)
        else:
            values.append(float(np.corrcoef(a, b)[0, 1]))
    return values


def effectiveParameters(JtJ, alpha, beta):
    """gamma = sum beta l / (beta l + alpha) over the eigenvalues l of JtJ

    Equals P - alpha trace((beta JtJ + alpha I)^-1).  Eigenvalues below zero
    (round-off of a positive semidefinite JtJ) count as zero; the result is
    clamped to [0, P].
    """
    P = JtJ.shape[0]
    if alpha == 0:
        return float(P)
    eigenvalues = np.clip(np.linalg.eigvalsh(JtJ), 0.0, None)
    scaled = beta * eigenvalues
    return float(min(max(np.sum(scaled / (scaled + alpha)), 0.0), P))


def trainBayesianRegularization(topology, X, T, config=None, valX=None, valT=None):
    """Train the network on normalized data

    The validation set only feeds valMse in the report; it never stops
    training.

    Args:
        topology (MlpTopology): network shape
        X (array): N x numInputs normalized training inputs
        T (array): N x numOutputs normalized training targets
        config (TrainConfig): settings (default TrainConfig())
        valX, valT (array): optional monitor set

    Returns:
        (MlpWeights, TrainReport)
    """
    config = config or TrainConfig()
    config.validate()
    checkTopology(topology)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    T = np.asarray(T, dtype=float).reshape(X.shape[0], -1)
    if X.shape[0] == 0:
        raise DataError('no training rows')
    if T.shape[1] != topology.numOutputs:
        raise DataError('expected %d targets per row, got %d' % (topology.numOutputs, T.shape[1]))

    P = numParameters(topology)
    numTargets = T.size
    report = TrainReport(P, numTargets)
    w = flatten(initWeights(topology, config.seed))

    def evaluate(vector):
        weights = unflatten(topology, vector)
        (hidden, outputs) = forwardPass(topology, weights, X)
        e = (outputs - T).ravel()
        return (weights, hidden, e, e.dot(e), vector.dot(vector))

    def validationMse(weights):
        if valX is None or len(valX) == 0:
            return None
        e = forward(topology, weights, valX) - np.asarray(valT, dtype=float).reshape(len(valX), -1)
        return float(np.mean(e * e))

    (weights, hidden, e, dataError, weightError) = evaluate(w)
    if not np.isfinite(dataError):
        raise NumericalError('non-finite initial training error')
    if config.regularize:
        gamma = float(P)
        beta = (numTargets - gamma) / (2.0 * dataError) if dataError > 0 else 1.0
        if not beta > 0:
            beta = 1.0
        alpha = gamma / (2.0 * weightError)
    else:
        (gamma, alpha, beta) = (float(P), 0.0, 1.0)
    mu = config.muInit
    J = jacobian(topology, weights, X, hidden)
    performance = beta * dataError + alpha * weightError

    for epoch in range(1, config.maxEpochs + 1):
        halfGradient = beta * J.T.dot(e) + alpha * w
        gradientNorm = 2.0 * float(np.linalg.norm(halfGradient))
        if gradientNorm < config.gradientTolerance:
            report.stopReason = 'gradient'
            break
        JtJ = J.T.dot(J)
        accepted = False
        while mu <= config.muMax:
            try:
                factor = scipy.linalg.cho_factor(beta * JtJ + (alpha + mu) * np.eye(P))
                step = scipy.linalg.cho_solve(factor, -halfGradient)
            except np.linalg.LinAlgError:
                mu *= config.muIncrease
                continue
            candidate = w + step
            (cWeights, cHidden, cE, cDataError, cWeightError) = evaluate(candidate)
            cPerformance = beta * cDataError + alpha * cWeightError
            if np.isfinite(cPerformance) and cPerformance < performance:
                (w, weights, hidden, e, dataError, weightError) = (candidate, cWeights, cHidden, cE, cDataError, cWeightError)
                mu *= config.muDecrease
                accepted = True
                break
            mu *= config.muIncrease
        if not accepted:
            report.stopReason = 'mu'
            break

        J = jacobian(topology, weights, X, hidden)
        betaKept = False
        if config.regularize:
            try:
                gamma = effectiveParameters(J.T.dot(J), alpha, beta)
            except np.linalg.LinAlgError:
                logging.warning('Epoch %d: eigenvalues of JtJ did not converge, keeping gamma %.2f', epoch, gamma)
            if weightError > 0:
                alpha = gamma / (2.0 * weightError)
            newBeta = (numTargets - gamma) / (2.0 * dataError) if dataError > 0 else math.inf
            if newBeta > 0 and math.isfinite(newBeta):
                beta = newBeta
            else:
                betaKept = True
        performance = beta * dataError + alpha * weightError
        entry = EpochRecord(epoch, performance, dataError, weightError, gradientNorm, mu, gamma, alpha, beta,
                            dataError / numTargets, validationMse(weights), False, betaKept)
        report.record(entry)
        if config.logEvery and epoch % config.logEvery == 0:
            logging.warning('Epoch %d: performance %g, mse %g, gamma %.2f, mu %g', epoch, performance, entry.trainMse, gamma, mu)
        if entry.trainMse <= config.performanceGoal:
            report.stopReason = 'goal'
            break
    if report.stopReason == None:
        report.stopReason = 'epochs'
    if not report.epochs:
        report.record(EpochRecord(0, performance, dataError, weightError, 2.0 * float(np.linalg.norm(beta * J.T.dot(e) + alpha * w)),
                                  mu, gamma, alpha, beta, dataError / numTargets, validationMse(weights), False, False))
    report.regression = regressionR(forward(topology, weights, X), T)
    logging.warning('Training stopped (%s) after %d epochs: mse %g, best %g at epoch %d',
                    report.stopReason, report.epochs[-1].epoch, report.finalMse, report.bestMse, report.bestEpoch)
    return (weights, report)


def predict(topology, weights, X, inputNormalizer=None, outputNormalizer=None):
    """Network outputs in physical units

    Args:
        topology (MlpTopology): network shape
        weights (MlpWeights): trained parameters
        X (array): N x numInputs inputs (physical units if inputNormalizer is given)
        inputNormalizer (NormalizationParams): maps raw inputs to [-1, 1]
        outputNormalizer (NormalizationParams): maps [-1, 1] back to output units

    Returns:
        N x numOutputs array
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if inputNormalizer != None:
        X = inputNormalizer.apply(X)
    outputs = forward(topology, weights, X)
    if outputNormalizer != None:
        outputs = outputNormalizer.invert(outputs)
    return outputs


def toDict(topology, weights):
    return {'topology': dict(topology._asdict()), 'weights': flatten(weights).tolist()}


def fromDict(d):
    t = d['topology']
    topology = MlpTopology(int(t['numInputs']), int(t['numHidden']), int(t['numOutputs']), t['activation'])
    checkTopology(topology)
    return (topology, unflatten(topology, d['weights']))
