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

Ordinary Kriging with a constant trend and the Gaussian correlation

    R(theta, xi, xj) = prod_d exp(-theta_d |xi_d - xj_d|^2)

theta is the maximizer of the concentrated log-likelihood, searched in
log10 space from seeded Latin Hypercube starts refined by bounded Powell
search.  The prediction is

    y(x) = beta + r(x)^T R^-1 (Y - beta F)

with R factorized once (Cholesky, nugget on the diagonal).

"""

from study_errors import DataError, NumericalError

import collections
import logging
import numpy as np
import scipy.linalg
import scipy.optimize
from scipy.stats import qmc

KrgModel = collections.namedtuple('KrgModel', ['X', 'y', 'theta', 'exponent', 'nugget', 'beta', 'sigma2', 'gamma', 'cholesky'])

NUGGET_CEILING = 1e-6
MAX_CONDITION = 1e10
REJECTED_PENALTY = 1e10
EXPONENT = 2.0


def correlationMatrix(XA, XB, theta):
    diff = np.abs(XA[:, None, :] - XB[None, :, :]) ** EXPONENT
    return np.exp(-np.tensordot(diff, theta, axes=([2], [0])))


def factorize(R, nugget):
    """Cholesky factor of R + nugget I, raising the nugget (x10) up to the ceiling"""
    n = R.shape[0]
    trial = nugget
    while True:
        try:
            return (scipy.linalg.cholesky(R + trial * np.eye(n), lower=True), trial)
        except np.linalg.LinAlgError:
            if trial >= NUGGET_CEILING:
                raise NumericalError('degenerate correlation')
            trial = min(max(trial * 10.0, 1e-12), NUGGET_CEILING)


def generalizedLeastSquares(C, y):
    """Constant-trend GLS given the Cholesky factor C of the correlation matrix

    Returns:
        (beta, sigma2, gamma) with gamma = R^-1 (y - beta)
    """
    ones = np.ones(len(y))
    rInvOnes = scipy.linalg.cho_solve((C, True), ones)
    rInvY = scipy.linalg.cho_solve((C, True), y)
    beta = ones.dot(rInvY) / ones.dot(rInvOnes)
    gamma = rInvY - beta * rInvOnes
    sigma2 = (y - beta).dot(gamma) / len(y)
    return (beta, sigma2, gamma)


def concentratedLogLikelihood(X, y, theta, nugget):
    """-(N/2) ln sigma2 - (1/2) ln det R, or -inf when R is unusable"""
    R = correlationMatrix(X, X, theta) + nugget * np.eye(len(y))
    eigenvalues = np.linalg.eigvalsh(R)
    if eigenvalues[0] <= 0 or eigenvalues[-1] / eigenvalues[0] > MAX_CONDITION:
        return -np.inf
    try:
        C = scipy.linalg.cholesky(R, lower=True)
    except np.linalg.LinAlgError:
        return -np.inf
    (beta, sigma2, gamma) = generalizedLeastSquares(C, y)
    if not sigma2 > 0:
        return -np.inf
    return -0.5 * len(y) * np.log(sigma2) - np.sum(np.log(np.diag(C)))


def likelihoodObjective(X, y, logTheta, logLower, logUpper, nugget):
    """Negative concentrated log-likelihood at 10^logTheta

    Rejected theta values score REJECTED_PENALTY times (1 + their log10
    distance below the upper bounds), which pushes the search towards
    larger theta where R is better conditioned.
    """
    logTheta = np.clip(logTheta, logLower, logUpper)
    value = concentratedLogLikelihood(X, y, 10.0 ** logTheta, nugget)
    if np.isfinite(value):
        return -value
    return REJECTED_PENALTY * (1.0 + float(np.sum(logUpper - logTheta)))


def searchTheta(X, y, thetaBounds, nugget, starts, seed):
    numInputs = X.shape[1]
    logLower = np.full(numInputs, np.log10(thetaBounds[0]))
    logUpper = np.full(numInputs, np.log10(thetaBounds[1]))

    def objective(logTheta):
        return likelihoodObjective(X, y, logTheta, logLower, logUpper, nugget)

    sampler = qmc.LatinHypercube(d=numInputs, seed=np.random.default_rng(seed))
    startPoints = qmc.scale(sampler.random(starts), logLower, logUpper)
    best = None
    for start in startPoints:
        result = scipy.optimize.minimize(objective, start, method='Powell',
                                         bounds=list(zip(logLower, logUpper)),
                                         options={'xtol': 1e-4, 'ftol': 1e-10})
        candidate = np.clip(result.x, logLower, logUpper)
        value = objective(candidate)
        if best == None or value < best[0]:
            best = (value, candidate)
    if best[0] >= REJECTED_PENALTY:
        raise NumericalError('degenerate correlation')
    return 10.0 ** best[1]


def fitKrgArrays(X, y, thetaBounds=(0.01, 100.0), nugget=1e-8, theta=None, starts=8, seed=0):
    """Fit an ordinary Kriging model

    Args:
        X (array): N x d distinct inputs (normalized)
        y (array): N targets
        thetaBounds (tuple): positive (lower, upper) bounds of every theta_d
        nugget (float): diagonal term added to R for conditioning
        theta (array): fixed correlation parameters (skips the likelihood search)
        starts (int): number of search starts
        seed (int): seed of the start points

    Returns:
        KrgModel
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if X.shape[0] < 2:
        raise DataError('Kriging needs at least 2 rows')
    if len(np.unique(X, axis=0)) != X.shape[0]:
        raise DataError('Kriging needs distinct input points')
    if not (0 < thetaBounds[0] < thetaBounds[1]):
        raise DataError('theta bounds must be positive and increasing: %s' % (thetaBounds,))
    if nugget < 0:
        raise DataError('nugget must be nonnegative')
    if theta is None:
        theta = searchTheta(X, y, thetaBounds, nugget, max(int(starts), 1), seed)
    else:
        theta = np.broadcast_to(np.asarray(theta, dtype=float), (X.shape[1],)).copy()
    (C, usedNugget) = factorize(correlationMatrix(X, X, theta), nugget)
    if usedNugget != nugget:
        logging.warning('Kriging nugget raised from %g to %g', nugget, usedNugget)
    (beta, sigma2, gamma) = generalizedLeastSquares(C, y)
    return KrgModel(X, y, theta, EXPONENT, usedNugget, beta, sigma2, gamma, C)


def fitKrg(train, objective, thetaBounds=(0.01, 100.0), nugget=1e-8, theta=None, starts=8, seed=0):
    return fitKrgArrays(train.inputMatrix(), train.column(objective), thetaBounds, nugget, theta, starts, seed)


def predictKrgBatch(model, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.X.shape[1]:
        raise DataError('expected %d inputs, got %d' % (model.X.shape[1], X.shape[1]))
    r = correlationMatrix(X, model.X, model.theta)
    return model.beta + r.dot(model.gamma)


def predictKrg(model, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DataError('expected a single design point')
    return float(predictKrgBatch(model, x.reshape(1, -1))[0])


def toDict(model):
    return {'X': model.X.tolist(), 'y': model.y.tolist(), 'theta': model.theta.tolist(),
            'exponent': model.exponent, 'nugget': model.nugget}


def fromDict(d):
    X = np.array(d['X'], dtype=float)
    y = np.array(d['y'], dtype=float)
    theta = np.array(d['theta'], dtype=float)
    (C, usedNugget) = factorize(correlationMatrix(X, X, theta), float(d['nugget']))
    (beta, sigma2, gamma) = generalizedLeastSquares(C, y)
    return KrgModel(X, y, theta, float(d['exponent']), usedNugget, beta, sigma2, gamma, C)
