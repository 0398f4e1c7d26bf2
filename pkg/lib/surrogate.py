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

One fit/predict/save contract over every model family.  A fitted
SurrogatePredictor carries the input normalization fitted on its training
rows; the closed-form families (rsf, rbf, krg) fit one model per objective
on normalized inputs, the network (nn) also normalizes its targets.

"""

from study_errors import DataError
import krg_model
import metrics
import neural_net
import pump_dataset
import rbf_model
import rsf_model

import collections
import json
import logging
import numpy as np

ModelKind = collections.namedtuple('ModelKind', ['fit', 'predict', 'toDict', 'fromDict', 'paramNames'])


def fitRsfKind(X, y, params, seed):
    return rsf_model.fitRsfArrays(X, y)


def fitRbfKind(X, y, params, seed):
    return rbf_model.fitRbfArrays(X, y, params.get('centers'), params.get('width_rule', 'median'),
                                  params.get('width'), seed)


def fitKrgKind(X, y, params, seed):
    return krg_model.fitKrgArrays(X, y, tuple(params.get('theta_bounds', (0.01, 100.0))), params.get('nugget', 1e-8),
                                  params.get('theta'), params.get('starts', 8), seed)


def getModelKinds():
    return {
        'rsf': ModelKind(fitRsfKind, rsf_model.predictRsfBatch, rsf_model.toDict, rsf_model.fromDict, ()),
        'rbf': ModelKind(fitRbfKind, rbf_model.predictRbfBatch, rbf_model.toDict, rbf_model.fromDict,
                         ('centers', 'width_rule', 'width')),
        'krg': ModelKind(fitKrgKind, krg_model.predictKrgBatch, krg_model.toDict, krg_model.fromDict,
                         ('theta_bounds', 'nugget', 'starts', 'theta')),
        # trained jointly over the objectives, see fitNeuralNet
        'nn': ModelKind(None, None, neural_net.toDict, neural_net.fromDict,
                        ('hidden', 'epochs', 'activation', 'joint', 'regularize', 'log_every')),
    }


def checkParams(kind, params):
    kinds = getModelKinds()
    if kind not in kinds:
        raise DataError('unknown model kind %s, expected one of %s' % (kind, sorted(kinds)))
    unknown = sorted(set(params) - set(kinds[kind].paramNames))
    if unknown:
        raise DataError('unknown %s parameters: %s' % (kind, ', '.join(unknown)))


class SurrogatePredictor(object):
    """Fitted model of one kind for a list of objectives.  predict is pure"""

    def __init__(self, kind, inputNames, objectives, inputNormalizer, models, outputNormalizer=None, trainReports=None):
        self.kind = kind
        self.inputNames = list(inputNames)
        self.objectives = list(objectives)
        self.inputNormalizer = inputNormalizer
        self.outputNormalizer = outputNormalizer
        self.models = models
        self.trainReports = trainReports or {}
        # provenance written with the model (digest, seed, training data digest)
        self.header = {}

    def predictRows(self, X):
        """Predictions (N x len(objectives)) for raw inputs ordered as inputNames"""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.inputNames):
            raise DataError('expected %d inputs, got %d' % (len(self.inputNames), X.shape[1]))
        normalized = self.inputNormalizer.apply(X)
        if self.kind == 'nn':
            keys = ['joint'] if 'joint' in self.models else self.objectives
            columns = [neural_net.forward(*self.models[key], normalized) for key in keys]
            return self.outputNormalizer.invert(np.hstack(columns))
        predictBatch = getModelKinds()[self.kind].predict
        return np.column_stack([predictBatch(self.models[o], normalized) for o in self.objectives])

    def predictDataset(self, dataset):
        predictions = self.predictRows(dataset.columns(self.inputNames))
        return collections.OrderedDict((o, predictions[:, k]) for k, o in enumerate(self.objectives))

    def toDict(self, header=None):
        d = {
            'header': dict(header or {}, kind=self.kind),
            'kind': self.kind,
            'inputNames': self.inputNames,
            'objectives': self.objectives,
            'inputNormalizer': self.inputNormalizer.toDict(),
        }
        if self.kind == 'nn':
            d['outputNormalizer'] = self.outputNormalizer.toDict()
            d['models'] = collections.OrderedDict((key, neural_net.toDict(*m)) for key, m in self.models.items())
        else:
            toDict = getModelKinds()[self.kind].toDict
            d['models'] = collections.OrderedDict((o, toDict(self.models[o])) for o in self.objectives)
        return d

    @staticmethod
    def fromDict(d):
        kind = d['kind']
        checkParams(kind, {})
        inputNormalizer = pump_dataset.NormalizationParams.fromDict(d['inputNormalizer'])
        if kind == 'nn':
            models = collections.OrderedDict((key, neural_net.fromDict(m)) for key, m in d['models'].items())
            outputNormalizer = pump_dataset.NormalizationParams.fromDict(d['outputNormalizer'])
            return SurrogatePredictor(kind, d['inputNames'], d['objectives'], inputNormalizer, models, outputNormalizer)
        fromDict = getModelKinds()[kind].fromDict
        models = {o: fromDict(d['models'][o]) for o in d['objectives']}
        return SurrogatePredictor(kind, d['inputNames'], d['objectives'], inputNormalizer, models)

    def save(self, path, header=None):
        d = self.toDict(header)
        self.header = d['header']
        with open(path, 'w') as f:
            json.dump(d, f, indent=1, sort_keys=True)
            f.write('\n')

    @staticmethod
    def load(path):
        try:
            with open(path, 'r') as f:
                d = json.load(f)
        except (OSError, ValueError) as e:
            raise DataError('cannot read model %s: %s' % (path, e))
        try:
            predictor = SurrogatePredictor.fromDict(d)
            predictor.header = d.get('header', {})
            return predictor
        except KeyError as e:
            raise DataError('model %s lacks field %s' % (path, e))


def fitNeuralNet(train, objectives, params, seed, val=None):
    inputNormalizer = pump_dataset.fitNormalizer(train, train.inputNames)
    outputNormalizer = pump_dataset.fitNormalizer(train, objectives)
    X = inputNormalizer.apply(train.inputMatrix())
    T = outputNormalizer.apply(train.columns(objectives))
    valX = valT = None
    if val != None and val.numRows:
        valX = inputNormalizer.apply(val.columns(train.inputNames))
        valT = outputNormalizer.apply(val.columns(objectives))
    config = neural_net.TrainConfig(maxEpochs=int(params.get('epochs', 1000)), regularize=bool(params.get('regularize', True)),
                                    seed=seed, logEvery=int(params.get('log_every', 100)))
    hidden = int(params.get('hidden', 50))
    activation = params.get('activation', 'tanh')
    groups = [('joint', list(range(len(objectives))))]
    if not params.get('joint', True):
        groups = [(o, [k]) for k, o in enumerate(objectives)]
    models = collections.OrderedDict()
    reports = collections.OrderedDict()
    for (key, columns) in groups:
        topology = neural_net.MlpTopology(X.shape[1], hidden, len(columns), activation)
        (weights, report) = neural_net.trainBayesianRegularization(
            topology, X, T[:, columns], config, valX, None if valT is None else valT[:, columns])
        models[key] = (topology, weights)
        reports[key] = report
    return SurrogatePredictor('nn', train.inputNames, objectives, inputNormalizer, models, outputNormalizer, reports)


def fitSurrogate(kind, train, objectives=None, params=None, seed=0, val=None):
    """Fit one model family on a training dataset

    Args:
        kind (str): 'rsf', 'rbf', 'krg' or 'nn'
        train (Dataset): training rows (not modified)
        objectives (list): output names to model (default all outputs)
        params (dict): family hyperparameters (config file names)
        seed (int): seed of the family's random choices
        val (Dataset): monitor rows for the network, ignored by other kinds

    Returns:
        SurrogatePredictor
    """
    params = dict(params or {})
    checkParams(kind, params)
    train.requireRoles()
    objectives = list(objectives or train.outputNames)
    for o in objectives:
        if o not in train.outputNames:
            raise DataError('objective %s is not an output of the training data' % o)
    logging.warning('Fitting %s on %d rows for %s', kind, train.numRows, ','.join(objectives))
    if kind == 'nn':
        return fitNeuralNet(train, objectives, params, seed, val)
    inputNormalizer = pump_dataset.fitNormalizer(train, train.inputNames)
    X = inputNormalizer.apply(train.inputMatrix())
    fit = getModelKinds()[kind].fit
    models = {o: fit(X, train.column(o), params, seed) for o in objectives}
    return SurrogatePredictor(kind, train.inputNames, objectives, inputNormalizer, models)


def selectRbfCenters(train, val, objectives, candidates=(10, 20, 30), widthRule='median', width=None, seed=0):
    """Pick the RBF center count with the lowest conventional RMSE on val

    With several objectives the score is their mean conventional RMSE.  Ties
    go to the smaller count.  Candidates above the training row count are
    skipped.

    Returns:
        (best count, {count: rmse})
    """
    if isinstance(objectives, str):
        objectives = [objectives]
    scores = collections.OrderedDict()
    for count in sorted(set(candidates)):
        if count > train.numRows:
            logging.warning('Skipping %d centers for %d training rows', count, train.numRows)
            continue
        params = {'centers': count, 'width_rule': widthRule}
        if width != None:
            params['width'] = width
        model = fitSurrogate('rbf', train, objectives, params, seed)
        predicted = model.predictDataset(val)
        scores[count] = float(np.mean([metrics.rmseConventional(val.column(o), predicted[o]) for o in objectives]))
    if not scores:
        raise DataError('no candidate center count fits %d training rows' % train.numRows)
    best = min(scores, key=lambda count: (scores[count], count))
    logging.warning('RBF center scores %s, choosing %d', dict(scores), best)
    return (best, scores)
