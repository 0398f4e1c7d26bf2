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

Gaussian radial basis function surrogate

    y(x) = sum_i w_i exp(-||x - X_i||^2 / (2 sigma^2))

Centers are all training points, or k-means centroids when fewer centers
than rows are requested.  Weights solve y = D_x . w in the least-squares
sense with an orthogonal (QR) solve.

"""

from study_errors import DataError, NumericalError

import collections
import logging
import numpy as np
import scipy.linalg
from scipy.cluster.vq import kmeans2
from scipy.spatial.distance import cdist, pdist

RbfModel = collections.namedtuple('RbfModel', ['centers', 'weights', 'width'])

WIDTH_RULES = ('median', 'nearest', 'fixed')
RIDGE = 1e-10
MAX_CONDITION = 1e14


def gaussianMatrix(X, centers, width):
    distances = cdist(np.atleast_2d(X), centers, 'sqeuclidean')
    return np.exp(-distances / (2.0 * width * width))


def chooseWidth(centers, widthRule, fixedWidth=None):
    """Gaussian width sigma from the center layout

    median: median pairwise center distance
    nearest: mean distance from each center to its nearest other center
    fixed: the given fixedWidth
    A single center gets width 1 unless fixed.
    """
    if widthRule not in WIDTH_RULES:
        raise DataError('unknown width rule %s, expected one of %s' % (widthRule, WIDTH_RULES))
    if widthRule == 'fixed':
        if fixedWidth == None or not fixedWidth > 0:
            raise DataError('fixed width rule needs a positive width')
        return float(fixedWidth)
    if len(centers) < 2:
        return 1.0
    if widthRule == 'median':
        width = float(np.median(pdist(centers)))
    else:
        distances = cdist(centers, centers)
        np.fill_diagonal(distances, np.inf)
        width = float(np.mean(distances.min(axis=1)))
    if not width > 0:
        raise NumericalError('zero Gaussian width from coincident centers')
    return width


def selectCenters(X, numCenters, seed):
    """Centers for the Gaussian kernels

    Rows are sorted lexicographically first so the result does not depend on
    the training row order.
    """
    numRows = X.shape[0]
    if not 1 <= numCenters <= numRows:
        raise DataError('center count must be within [1, %d], got %d' % (numRows, numCenters))
    ordered = X[np.lexsort(X.T[::-1])]
    if numCenters == numRows:
        centers = ordered
    else:
        (centers, labels) = kmeans2(ordered, numCenters, seed=np.random.default_rng(seed), minit='++')
    if len(np.unique(np.round(centers, 12), axis=0)) != len(centers):
        raise DataError('duplicate RBF centers after selection')
    return centers


def fitRbfArrays(X, y, numCenters=None, widthRule='median', fixedWidth=None, seed=0):
    """Fit weights of a Gaussian RBF model

    Args:
        X (array): N x d inputs (normalized)
        y (array): N targets
        numCenters (int): number of kernels (default: one per row)
        widthRule (str): 'median', 'nearest' or 'fixed'
        fixedWidth (float): width for the 'fixed' rule
        seed (int): k-means seed

    Returns:
        RbfModel
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    numCenters = X.shape[0] if numCenters == None else int(numCenters)
    centers = selectCenters(X, numCenters, seed)
    width = chooseWidth(centers, widthRule, fixedWidth)
    D = gaussianMatrix(X, centers, width)
    if np.linalg.cond(D) > MAX_CONDITION:
        logging.warning('Ill-conditioned Gaussian matrix, adding ridge %g', RIDGE)
        D = np.vstack([D, np.sqrt(RIDGE) * np.eye(numCenters)])
        y = np.concatenate([y, np.zeros(numCenters)])
    (Q, R) = scipy.linalg.qr(D, mode='economic')
    weights = scipy.linalg.solve_triangular(R, Q.T.dot(y))
    if not np.all(np.isfinite(weights)):
        raise NumericalError('non-finite RBF weights')
    return RbfModel(centers, weights, width)


def fitRbf(train, objective, numCenters=None, widthRule='median', fixedWidth=None, seed=0):
    return fitRbfArrays(train.inputMatrix(), train.column(objective), numCenters, widthRule, fixedWidth, seed)


def predictRbfBatch(model, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.centers.shape[1]:
        raise DataError('expected %d inputs, got %d' % (model.centers.shape[1], X.shape[1]))
    return gaussianMatrix(X, model.centers, model.width).dot(model.weights)


def predictRbf(model, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DataError('expected a single design point')
    return float(predictRbfBatch(model, x.reshape(1, -1))[0])


def toDict(model):
    return {'centers': model.centers.tolist(), 'weights': model.weights.tolist(), 'width': model.width}


def fromDict(d):
    return RbfModel(np.array(d['centers'], dtype=float), np.array(d['weights'], dtype=float), float(d['width']))
