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

Nearest-gap interpolation augmentation.  Every sample r yields two extra
samples r+ and r- where each attribute (inputs and outputs alike) moves by
its own bias

    bias = IF * min_{j != i} |v_i - v_j|

taken over the column of that attribute.  The result holds the originals,
then all r+, then all r-.

"""

from study_errors import DataError
import pump_dataset

import collections
import numpy as np

PAIRINGS = ('plus_minus', 'independent')


class AugmentConfig(collections.namedtuple('AugmentConfig', ['interpolationFactor', 'pairing', 'seed'])):

    def validate(self):
        if not (0 <= self.interpolationFactor < 0.5):
            raise DataError('interpolation factor must be in [0, 0.5), got %s' % self.interpolationFactor)
        if self.pairing not in PAIRINGS:
            raise DataError('unknown pairing %s, expected one of %s' % (self.pairing, PAIRINGS))

AugmentConfig.__new__.__defaults__ = (0.025, 'plus_minus', 0)


def attributeBias(values, index, interpolationFactor):
    """IF times the distance from values[index] to its nearest other value

    Args:
        values (array like): one attribute column
        index (int): row of the value being perturbed
        interpolationFactor (float): IF

    Returns:
        bias (0 when the nearest other value is a duplicate)
    """
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        raise DataError('nearest gap needs at least 2 values, got %d' % len(values))
    if not 0 <= index < len(values):
        raise DataError('index %d outside column of %d values' % (index, len(values)))
    others = np.delete(values, index)
    return interpolationFactor * float(np.min(np.abs(others - values[index])))


def columnBiases(values, interpolationFactor):
    """attributeBias of every cell of an N x A matrix, column by column"""
    gaps = np.abs(values[:, None, :] - values[None, :, :])
    diagonal = np.arange(values.shape[0])
    gaps[diagonal, diagonal, :] = np.inf
    return interpolationFactor * gaps.min(axis=1)


class AugmentedDataset(object):
    """Original rows followed by the generated rows, with provenance

    provenance[k] = (source row index, sign) with sign 0 for originals,
    +1 for the r+ copies and -1 for the r- copies.
    """

    def __init__(self, original, values, provenance, config):
        self.original = original
        self.values = values
        self.provenance = provenance
        self.config = config

    @property
    def numRows(self):
        return len(self.provenance)

    def toDataset(self):
        metadata = dict(self.original.metadata)
        metadata['augmented'] = '1'
        metadata['interpolation_factor'] = repr(self.config.interpolationFactor)
        return pump_dataset.Dataset(self.original.attributes, self.values, metadata)

    def commentColumns(self):
        return {'source': [p[0] for p in self.provenance],
                'sign': ['%+d' % p[1] if p[1] else '0' for p in self.provenance]}


def isAugmented(dataset):
    return str(dataset.metadata.get('augmented', '0')).lower() in ('1', 'true', 'yes')


def augment(dataset, config=None, force=False):
    """Triple a dataset with nearest-gap perturbed copies

    Args:
        dataset (Dataset): at least 2 rows
        config (AugmentConfig): interpolation factor, pairing and seed
        force (bool): allow augmenting an already augmented dataset

    Returns:
        AugmentedDataset with 3 x dataset.numRows rows
    """
    config = config or AugmentConfig()
    config.validate()
    if dataset.numRows < 2:
        raise DataError('augmentation needs at least 2 rows, got %d' % dataset.numRows)
    if isAugmented(dataset) and not force:
        raise DataError('dataset is already augmented (use force to augment again)')

    values = np.array(dataset.values)
    biases = columnBiases(values, config.interpolationFactor)
    if config.pairing == 'independent':
        signs = np.random.default_rng(config.seed).choice([-1.0, 1.0], size=values.shape)
        biases = signs * biases
    plus = values + biases
    minus = values - biases
    numRows = dataset.numRows
    provenance = [(i, 0) for i in range(numRows)] + [(i, 1) for i in range(numRows)] + [(i, -1) for i in range(numRows)]
    return AugmentedDataset(dataset, np.vstack([values, plus, minus]), provenance, config)
