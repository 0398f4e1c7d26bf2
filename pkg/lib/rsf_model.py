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

Quadratic response surface: least-squares fit of the complete degree-2
polynomial [1, x_i, x_i^2, x_i x_j (i < j)] . C

"""

from study_errors import DataError, NumericalError

import collections
import itertools
import numpy as np
import scipy.linalg

RsfModel = collections.namedtuple('RsfModel', ['coefficients', 'numInputs'])


def numTerms(numInputs):
    return 1 + 2 * numInputs + numInputs * (numInputs - 1) // 2


def basisNames(inputNames):
    names = ['1'] + list(inputNames) + [n + '^2' for n in inputNames]
    names += [a + '*' + b for (a, b) in itertools.combinations(inputNames, 2)]
    return names


def basisMatrix(X):
    """Quadratic basis expansion of the rows of X (N x d) -> N x numTerms(d)"""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    columns = [np.ones(X.shape[0])]
    columns += [X[:, i] for i in range(X.shape[1])]
    columns += [X[:, i] ** 2 for i in range(X.shape[1])]
    columns += [X[:, i] * X[:, j] for (i, j) in itertools.combinations(range(X.shape[1]), 2)]
    return np.column_stack(columns)


def fitRsfArrays(X, y, inputNames=None):
    """Least-squares quadratic fit via column-pivoted QR

    Args:
        X (array): N x d inputs
        y (array): N targets
        inputNames (list): names used in rank-deficiency messages

    Returns:
        RsfModel
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    (numRows, numInputs) = X.shape
    p = numTerms(numInputs)
    if numRows < p:
        raise DataError('quadratic fit of %d inputs needs at least %d rows, got %d' % (numInputs, p, numRows))
    F = basisMatrix(X)
    (Q, R, pivot) = scipy.linalg.qr(F, mode='economic', pivoting=True)
    diag = np.abs(np.diag(R))
    tolerance = max(F.shape) * np.finfo(float).eps * diag[0]
    rank = int(np.sum(diag > tolerance))
    if rank < p:
        names = basisNames(inputNames or ['x%d' % (i + 1) for i in range(numInputs)])
        deficient = [names[k] for k in pivot[rank:]]
        raise NumericalError('rank-deficient quadratic design matrix, dependent columns: ' + ', '.join(deficient))
    coefficients = np.empty(p)
    coefficients[pivot] = scipy.linalg.solve_triangular(R, Q.T.dot(y))
    return RsfModel(coefficients, numInputs)


def fitRsf(train, objective):
    """Fit the quadratic response surface of one objective on the dataset inputs"""
    return fitRsfArrays(train.inputMatrix(), train.column(objective), train.inputNames)


def predictRsfBatch(model, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.numInputs:
        raise DataError('expected %d inputs, got %d' % (model.numInputs, X.shape[1]))
    return basisMatrix(X).dot(model.coefficients)


def predictRsf(model, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DataError('expected a single design point')
    return float(predictRsfBatch(model, x.reshape(1, -1))[0])


def toDict(model):
    return {'coefficients': model.coefficients.tolist(), 'numInputs': model.numInputs}


def fromDict(d):
    return RsfModel(np.array(d['coefficients'], dtype=float), int(d['numInputs']))
