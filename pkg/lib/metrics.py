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

Validity measures of a surrogate against reference (oracle) values and the
model comparison report.

    rmseScaled       = sqrt(sum (y - yhat)^2) / (m * mean(y))
    rmseConventional = sqrt(sum (y - yhat)^2 / m) / mean(y)
    rSquared         = 1 - sum (y - yhat)^2 / sum (y - mean(y))^2
    meanError        = mean |yhat - y|

The report stores rmse and R^2 as percentages.

"""

from study_errors import DataError

import collections
import csv
import json
import logging
import math
import numpy as np


def pairedVectors(reference, predicted, minLength=1):
    reference = np.asarray(reference, dtype=float).ravel()
    predicted = np.asarray(predicted, dtype=float).ravel()
    if reference.shape != predicted.shape:
        raise DataError('length mismatch: %d reference vs %d predicted values' % (len(reference), len(predicted)))
    if len(reference) < minLength:
        raise DataError('need at least %d values, got %d' % (minLength, len(reference)))
    return (reference, predicted)


def sumSquaredError(reference, predicted):
    diff = reference - predicted
    return float(diff.dot(diff))


def referenceMean(reference):
    mean = float(np.mean(reference))
    if mean == 0:
        raise DataError('zero mean reference')
    return mean


def rmseScaled(reference, predicted):
    """Normalized RMSE with the sample count outside the square root"""
    (reference, predicted) = pairedVectors(reference, predicted)
    return math.sqrt(sumSquaredError(reference, predicted)) / (len(reference) * referenceMean(reference))


def rmseConventional(reference, predicted):
    (reference, predicted) = pairedVectors(reference, predicted)
    return math.sqrt(sumSquaredError(reference, predicted) / len(reference)) / referenceMean(reference)


def rSquared(reference, predicted):
    (reference, predicted) = pairedVectors(reference, predicted, 2)
    centered = reference - np.mean(reference)
    total = float(centered.dot(centered))
    if total == 0:
        raise DataError('zero total variance')
    return 1.0 - sumSquaredError(reference, predicted) / total


def meanError(reference, predicted):
    (reference, predicted) = pairedVectors(reference, predicted)
    return float(np.mean(np.abs(predicted - reference)))


ValidationRow = collections.namedtuple('ValidationRow', ['model', 'objective', 'rmseScaledPct', 'rmseConventionalPct',
                                                         'rSquaredPct', 'meanError', 'deltas'])

CSV_COLUMNS = ['model', 'objective', 'rmse_scaled_pct', 'rmse_conventional_pct', 'r_squared_pct', 'mean_error']


def formatNumber(value):
    return '%.17g' % value


def headerLine(header):
    """'## k=v ...' over the scalar header entries; nested entries stay in the JSON report"""
    scalars = [k for k in sorted(header) if not isinstance(header[k], (dict, list))]
    return '## ' + ' '.join('%s=%s' % (k, header[k]) for k in scalars) + '\n'


class ValidationReport(object):
    """Metrics per model and objective plus the per-sample series behind them"""

    def __init__(self, rows, references, predictions, header=None):
        """
        Args:
            rows (list): ValidationRow per model x objective
            references (dict): objective -> reference values of the test rows
            predictions (dict): model -> objective -> predicted values
            header (dict): digest, seed, run config and dataset digests
        """
        self.rows = rows
        self.references = references
        self.predictions = predictions
        self.header = dict(header or {})

    def row(self, model, objective):
        for r in self.rows:
            if r.model == model and r.objective == objective:
                return r
        raise DataError('no report row for %s/%s' % (model, objective))

    @property
    def models(self):
        return list(self.predictions.keys())

    @property
    def objectives(self):
        return list(self.references.keys())

    def toDict(self):
        return {
            'header': self.header,
            'rows': [{'model': r.model, 'objective': r.objective, 'rmse_scaled_pct': r.rmseScaledPct,
                      'rmse_conventional_pct': r.rmseConventionalPct, 'r_squared_pct': r.rSquaredPct,
                      'mean_error': r.meanError, 'deltas': list(r.deltas)} for r in self.rows],
        }

    def saveJson(self, path):
        with open(path, 'w') as f:
            json.dump(self.toDict(), f, indent=1, sort_keys=True)
            f.write('\n')

    def saveCsv(self, path):
        with open(path, 'w', newline='') as f:
            f.write(headerLine(self.header))
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(CSV_COLUMNS)
            for r in self.rows:
                writer.writerow([r.model, r.objective] + [formatNumber(v) for v in r[2:6]])

    def plotTable(self, objective):
        """Columns sample, reference, <model>_prediction, <model>_delta for one objective"""
        models = [m for m in self.models if objective in self.predictions[m]]
        header = ['sample', 'reference']
        for model in models:
            header += [model + '_prediction', model + '_delta']
        rows = []
        reference = self.references[objective]
        for i, value in enumerate(reference):
            row = [str(i + 1), formatNumber(value)]
            for model in models:
                predicted = self.predictions[model][objective][i]
                row += [formatNumber(predicted), formatNumber(predicted - value)]
            rows.append(row)
        return (header, rows)

    def savePlotCsv(self, objective, path):
        (header, rows) = self.plotTable(objective)
        with open(path, 'w', newline='') as f:
            f.write(headerLine(self.header))
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            writer.writerows(rows)


def compare(predictors, test, header=None):
    """Score fitted models on a test dataset

    Args:
        predictors (dict): model label -> SurrogatePredictor (ordered)
        test (Dataset): reference inputs and outputs
        header (dict): report header (digest, seed, ...)

    Returns:
        ValidationReport with len(predictors) x len(objectives) rows
    """
    references = collections.OrderedDict()
    predictions = collections.OrderedDict()
    rows = []
    for label, predictor in predictors.items():
        missing = [n for n in predictor.inputNames if n not in test.inputNames]
        if missing or len(predictor.inputNames) != len(test.inputNames):
            raise DataError('model %s inputs %s do not match test inputs %s' % (label, predictor.inputNames, test.inputNames))
        predicted = predictor.predictDataset(test)
        predictions[label] = collections.OrderedDict()
        for objective in predictor.objectives:
            if objective not in test.outputNames:
                raise DataError('test data has no output %s for model %s' % (objective, label))
            reference = test.column(objective)
            references.setdefault(objective, [float(v) for v in reference])
            values = predicted[objective]
            predictions[label][objective] = [float(v) for v in values]
            row = ValidationRow(label, objective, 100.0 * rmseScaled(reference, values), 100.0 * rmseConventional(reference, values),
                                100.0 * rSquared(reference, values), meanError(reference, values),
                                [float(v) for v in values - reference])
            rows.append(row)
            logging.warning('%s %s: rmse %.4f%%, R2 %.2f%%, mean error %g', label, objective,
                            row.rmseScaledPct, row.rSquaredPct, row.meanError)
    return ValidationReport(rows, references, predictions, header)
