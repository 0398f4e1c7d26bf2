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

Tabular sample data shared by every model: named input attributes (design
variables) and output attributes (objectives), CSV file I/O, deterministic
train/validation/test splits and [-1, 1] min-max normalization.

CSV layout:
    ## key=value ...          optional metadata lines
    D2,b2,beta2,head,power    attribute names
    in,in,in,out,out          roles
    #m,m,deg,m,kW             optional units
    0.27,0.015,19,80.1,29.3   numeric rows

"""

from study_errors import DataError

import collections
import csv
import hashlib
import json
import logging
import math
import numpy as np

INPUT = 'in'
OUTPUT = 'out'

AttributeSpec = collections.namedtuple('AttributeSpec', ['name', 'kind', 'unit'])
AttributeSpec.__new__.__defaults__ = ('',)


class Dataset(object):
    """Ordered samples of named attributes.  Immutable after construction"""

    def __init__(self, attributes, rows, metadata=None):
        """
        Args:
            attributes (list): AttributeSpec for each column
            rows (array like): N x len(attributes) real values
            metadata (dict): free form key/value strings (digest, seed, augmented)
        """
        self.attributes = tuple(AttributeSpec(*a) for a in attributes)
        names = [a.name for a in self.attributes]
        dupes = sorted(set(n for n in names if names.count(n) > 1))
        if dupes:
            raise DataError('duplicate attribute name: ' + ', '.join(dupes))
        for a in self.attributes:
            if a.kind not in (INPUT, OUTPUT):
                raise DataError('attribute %s has unknown role %s' % (a.name, a.kind))
        values = np.array(rows, dtype=float)
        if values.size == 0:
            values = values.reshape((0, len(self.attributes)))
        if values.ndim != 2 or values.shape[1] != len(self.attributes):
            raise DataError('every row must have %d values' % len(self.attributes))
        if not np.all(np.isfinite(values)):
            raise DataError('dataset contains non-finite values')
        values.setflags(write=False)
        self.values = values
        self.metadata = dict(metadata or {})

    @property
    def numRows(self):
        return self.values.shape[0]

    @property
    def names(self):
        return [a.name for a in self.attributes]

    def namesOfKind(self, kind):
        return [a.name for a in self.attributes if a.kind == kind]

    @property
    def inputNames(self):
        return self.namesOfKind(INPUT)

    @property
    def outputNames(self):
        return self.namesOfKind(OUTPUT)

    def index(self, name):
        names = self.names
        if name not in names:
            raise DataError('unknown attribute ' + name)
        return names.index(name)

    def column(self, name):
        return self.values[:, self.index(name)]

    def columns(self, names):
        return self.values[:, [self.index(n) for n in names]]

    def inputMatrix(self):
        return self.columns(self.inputNames)

    def outputMatrix(self):
        return self.columns(self.outputNames)

    def subset(self, rowIndices):
        return Dataset(self.attributes, self.values[np.asarray(rowIndices, dtype=int)], self.metadata)

    def withValues(self, rows, metadata=None):
        return Dataset(self.attributes, rows, self.metadata if metadata == None else metadata)

    def requireRoles(self):
        if not self.inputNames or not self.outputNames:
            raise DataError('dataset needs at least one input and one output attribute')

    def __eq__(self, other):
        return (isinstance(other, Dataset) and self.attributes == other.attributes
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return 'Dataset(%s, %d rows)' % (','.join(self.names), self.numRows)


def parseMetadata(line):
    metadata = {}
    for token in line[2:].split():
        if '=' in token:
            (key, value) = token.split('=', 1)
            metadata[key] = value
    return metadata


def formatMetadata(metadata):
    return '## ' + ' '.join('%s=%s' % (k, metadata[k]) for k in sorted(metadata))


def loadCsv(path):
    """Read a dataset CSV file

    Args:
        path (str): file path

    Returns:
        Dataset with rows in file order
    """
    try:
        with open(path, 'r', encoding='utf-8', newline='') as csvFile:
            lines = list(csv.reader(csvFile))
    except FileNotFoundError:
        raise DataError('missing file ' + str(path))

    metadata = {}
    lineNumber = 0
    while lineNumber < len(lines) and lines[lineNumber] and lines[lineNumber][0].startswith('##'):
        metadata.update(parseMetadata(','.join(lines[lineNumber])))
        lineNumber += 1
    if lineNumber + 1 >= len(lines):
        raise DataError('%s: header and role rows are required' % path)
    header = [h.strip() for h in lines[lineNumber]]
    roles = [r.strip() for r in lines[lineNumber + 1]]
    lineNumber += 2
    if len(roles) != len(header):
        raise DataError('%s: role row has %d cells for %d headers' % (path, len(roles), len(header)))
    keep = [i for i, h in enumerate(header) if not h.startswith('#')]
    units = [''] * len(header)
    if lineNumber < len(lines) and lines[lineNumber] and lines[lineNumber][0].startswith('#'):
        unitCells = list(lines[lineNumber])
        unitCells[0] = unitCells[0][1:]
        units = [u.strip() for u in unitCells] + [''] * max(0, len(header) - len(unitCells))
        lineNumber += 1

    attributes = [AttributeSpec(header[i], roles[i], units[i]) for i in keep]
    rows = []
    for offset, cells in enumerate(lines[lineNumber:]):
        fileLine = lineNumber + offset + 1
        if not cells or (len(cells) == 1 and not cells[0].strip()):
            continue
        if len(cells) != len(header):
            raise DataError('ragged row at line %d' % fileLine)
        try:
            rows.append([float(cells[i]) for i in keep])
        except ValueError:
            raise DataError('non-numeric cell at line %d' % fileLine)
    dataset = Dataset(attributes, rows, metadata)
    dataset.requireRoles()
    logging.warning('Loaded %d rows of %s from %s', dataset.numRows, ','.join(dataset.names), path)
    return dataset


def formatNumber(value):
    return '%.17g' % value


def datasetDigest(dataset):
    """First 16 hex digits of SHA-256 over attribute names, roles, units and
    the values as written to CSV"""
    content = {
        'attributes': [[a.name, a.kind, a.unit] for a in dataset.attributes],
        'values': [[formatNumber(v) for v in row] for row in dataset.values],
    }
    text = json.dumps(content, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(text.encode('utf-8')).hexdigest()[:16]


def saveCsv(dataset, path, metadata=None, commentColumns=None):
    """Write a dataset CSV file (LF line endings, 17 significant digits)

    Args:
        dataset (Dataset): data to write
        path (str): output file path
        metadata (dict): extra metadata merged over dataset.metadata
        commentColumns (dict): header name (without '#') -> list of per-row strings
    """
    allMetadata = dict(dataset.metadata)
    allMetadata.update(metadata or {})
    commentColumns = commentColumns or {}
    commentNames = sorted(commentColumns.keys())
    with open(path, 'w', encoding='utf-8', newline='') as csvFile:
        writer = csv.writer(csvFile, lineterminator='\n')
        if allMetadata:
            csvFile.write(formatMetadata(allMetadata) + '\n')
        writer.writerow(dataset.names + ['#' + n for n in commentNames])
        writer.writerow([a.kind for a in dataset.attributes] + ['' for n in commentNames])
        if any(a.unit for a in dataset.attributes):
            units = [a.unit for a in dataset.attributes] + ['' for n in commentNames]
            units[0] = '#' + units[0]
            writer.writerow(units)
        for i, row in enumerate(dataset.values):
            writer.writerow([formatNumber(v) for v in row] + [str(commentColumns[n][i]) for n in commentNames])


class SplitSpec(collections.namedtuple('SplitSpec', ['trainFraction', 'valFraction', 'testFraction', 'seed'])):
    """Fractions of the train/validation/test partition and the shuffle seed"""

    def validate(self):
        fractions = (self.trainFraction, self.valFraction, self.testFraction)
        if any((f < 0) or not math.isfinite(f) for f in fractions):
            raise DataError('split fractions must be nonnegative: %s' % (fractions,))
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise DataError('split fractions must sum to 1: %s' % (fractions,))


def roundHalfUp(value):
    return int(math.floor(value + 0.5))


def splitIndices(numRows, splitSpec):
    splitSpec.validate()
    if numRows < 3:
        raise DataError('split needs at least 3 rows, got %d' % numRows)
    numVal = roundHalfUp(splitSpec.valFraction * numRows)
    numTest = roundHalfUp(splitSpec.testFraction * numRows)
    numTrain = numRows - numVal - numTest
    if numTrain < 0:
        raise DataError('split fractions leave no room for training rows')
    permutation = np.random.default_rng(splitSpec.seed).permutation(numRows)
    trainIdx = np.sort(permutation[:numTrain])
    valIdx = np.sort(permutation[numTrain:numTrain + numVal])
    testIdx = np.sort(permutation[numTrain + numVal:])
    return (trainIdx, valIdx, testIdx)


def split(dataset, splitSpec):
    """Deterministic disjoint partition of the rows into train, validation and test

    Args:
        dataset (Dataset): rows to partition (at least 3)
        splitSpec (SplitSpec): fractions and seed

    Returns:
        (train, val, test) Datasets
    """
    (trainIdx, valIdx, testIdx) = splitIndices(dataset.numRows, splitSpec)
    return (dataset.subset(trainIdx), dataset.subset(valIdx), dataset.subset(testIdx))


class NormalizationParams(object):
    """Per-attribute affine map of [min, max] onto [-1, 1]

    Degenerate attributes (max == min) map to 0 and invert back to min.
    Values outside [min, max] extrapolate linearly.
    """

    def __init__(self, names, mins, maxs):
        self.names = list(names)
        self.mins = np.array(mins, dtype=float)
        self.maxs = np.array(maxs, dtype=float)
        if np.any(self.maxs < self.mins):
            raise DataError('normalization max below min')
        self.spans = self.maxs - self.mins
        self.degenerate = self.spans == 0

    def apply(self, values):
        values = np.asarray(values, dtype=float)
        safeSpans = np.where(self.degenerate, 1.0, self.spans)
        scaled = 2.0 * (values - self.mins) / safeSpans - 1.0
        return np.where(self.degenerate, 0.0, scaled)

    def invert(self, normalized):
        normalized = np.asarray(normalized, dtype=float)
        restored = (normalized + 1.0) / 2.0 * self.spans + self.mins
        return np.where(self.degenerate, self.mins, restored)

    def subset(self, names):
        idx = [self.names.index(n) for n in names]
        return NormalizationParams(names, self.mins[idx], self.maxs[idx])

    def applyDataset(self, dataset):
        cols = [dataset.index(n) for n in self.names]
        values = np.array(dataset.values)
        values[:, cols] = self.apply(values[:, cols])
        return dataset.withValues(values)

    def toDict(self):
        return {'names': self.names, 'mins': self.mins.tolist(), 'maxs': self.maxs.tolist()}

    @staticmethod
    def fromDict(d):
        return NormalizationParams(d['names'], d['mins'], d['maxs'])


def fitNormalizer(dataset, names=None):
    """Fit [-1, 1] normalization on the given dataset (the training split)

    Args:
        dataset (Dataset): training data
        names (list): attributes to cover (default all)

    Returns:
        NormalizationParams
    """
    names = names if names != None else dataset.names
    if dataset.numRows == 0:
        raise DataError('cannot fit normalization on an empty dataset')
    values = dataset.columns(names)
    return NormalizationParams(names, values.min(axis=0), values.max(axis=0))
