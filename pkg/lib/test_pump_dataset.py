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

Test pump_dataset

"""

import pump_dataset
from pump_dataset import AttributeSpec, Dataset, SplitSpec
from study_errors import DataError

import numpy as np
import pytest

def makeDataset(numRows, seed=0):
    rng = np.random.default_rng(seed)
    attributes = [AttributeSpec('D2', 'in', 'm'), AttributeSpec('b2', 'in', 'm'), AttributeSpec('beta2', 'in', 'deg'),
                  AttributeSpec('head', 'out', 'm'), AttributeSpec('power', 'out', 'kW')]
    return Dataset(attributes, rng.uniform(-50, 50, size=(numRows, 5)))


def writeLines(path, lines):
    with open(path, 'w', newline='') as f:
        f.write('\n'.join(lines) + '\n')


def test_load_csv_shape(tmp_path):
    d = makeDataset(60)
    path = str(tmp_path / 'd.csv')
    pump_dataset.saveCsv(d, path)
    loaded = pump_dataset.loadCsv(path)
    assert loaded.numRows == 60
    assert len(loaded.attributes) == 5
    assert loaded.inputNames == ['D2', 'b2', 'beta2']
    assert loaded.outputNames == ['head', 'power']


def test_csv_round_trip_random_tables(tmp_path):
    for seed in range(5):
        d = makeDataset(17, seed)
        path = str(tmp_path / ('d%d.csv' % seed))
        pump_dataset.saveCsv(d, path)
        once = pump_dataset.loadCsv(path)
        pump_dataset.saveCsv(once, path)
        twice = pump_dataset.loadCsv(path)
        assert once == d
        assert twice == d
        assert np.array_equal(twice.values, d.values)


def test_ragged_row(tmp_path):
    path = str(tmp_path / 'r.csv')
    writeLines(path, ['a,b,c,d,e', 'in,in,in,out,out', '1,2,3,4,5', '1,2,3,4'])
    with pytest.raises(DataError, match='ragged row at line 4'):
        pump_dataset.loadCsv(path)


def test_crlf_and_units(tmp_path):
    path = str(tmp_path / 'crlf.csv')
    with open(path, 'w', newline='') as f:
        f.write('## seed=3\r\nx,y\r\nin,out\r\n#m,kW\r\n1.5,2\r\n')
    d = pump_dataset.loadCsv(path)
    assert d.attributes[0].unit == 'm'
    assert d.attributes[1].unit == 'kW'
    assert d.metadata['seed'] == '3'
    assert d.values.tolist() == [[1.5, 2.0]]


def test_load_errors(tmp_path):
    with pytest.raises(DataError, match='missing file'):
        pump_dataset.loadCsv(str(tmp_path / 'none.csv'))
    path = str(tmp_path / 'bad.csv')
    writeLines(path, ['x,y', 'in,out', '1,abc'])
    with pytest.raises(DataError, match='non-numeric'):
        pump_dataset.loadCsv(path)
    writeLines(path, ['x,x', 'in,out', '1,2'])
    with pytest.raises(DataError, match='duplicate'):
        pump_dataset.loadCsv(path)
    writeLines(path, ['x,y', 'in,in', '1,2'])
    with pytest.raises(DataError, match='at least one input and one output'):
        pump_dataset.loadCsv(path)


def test_comment_columns_ignored(tmp_path):
    d = makeDataset(3)
    path = str(tmp_path / 'p.csv')
    pump_dataset.saveCsv(d, path, commentColumns={'source': [0, 1, 2], 'sign': ['+', '+', '-']})
    assert pump_dataset.loadCsv(path) == d


def test_split_study_sizes():
    d = makeDataset(60)
    (train, val, test) = pump_dataset.split(d, SplitSpec(0.8, 0.1, 0.1, 1))
    assert (train.numRows, val.numRows, test.numRows) == (48, 6, 6)


def test_split_all_train():
    d = makeDataset(10)
    (train, val, test) = pump_dataset.split(d, SplitSpec(1.0, 0.0, 0.0, 5))
    assert train.numRows == 10
    assert val.numRows == 0
    assert test.numRows == 0


def test_split_partition_and_determinism():
    sizes = None
    for seed in range(100):
        parts = pump_dataset.splitIndices(60, SplitSpec(0.8, 0.1, 0.1, seed))
        again = pump_dataset.splitIndices(60, SplitSpec(0.8, 0.1, 0.1, seed))
        for p, q in zip(parts, again):
            assert np.array_equal(p, q)
        allIdx = np.concatenate(parts)
        assert sorted(allIdx.tolist()) == list(range(60))
        if sizes == None:
            sizes = [len(p) for p in parts]
        assert [len(p) for p in parts] == sizes
    first = pump_dataset.splitIndices(60, SplitSpec(0.8, 0.1, 0.1, 0))
    second = pump_dataset.splitIndices(60, SplitSpec(0.8, 0.1, 0.1, 1))
    assert not all(np.array_equal(p, q) for p, q in zip(first, second))


def test_split_remainder_to_train():
    parts = pump_dataset.splitIndices(7, SplitSpec(0.5, 0.25, 0.25, 0))
    assert [len(p) for p in parts] == [3, 2, 2]


def test_split_errors():
    d = makeDataset(10)
    with pytest.raises(DataError):
        pump_dataset.split(d, SplitSpec(0.8, 0.1, 0.2, 0))
    with pytest.raises(DataError):
        pump_dataset.split(d, SplitSpec(1.1, -0.1, 0.0, 0))
    with pytest.raises(DataError):
        pump_dataset.split(makeDataset(2), SplitSpec(1.0, 0.0, 0.0, 0))


def test_normalize_two_values():
    d = Dataset([AttributeSpec('x', 'in'), AttributeSpec('y', 'out')], [[2, 0], [4, 1]])
    params = pump_dataset.fitNormalizer(d)
    assert params.apply(d.values)[:, 0].tolist() == [-1.0, 1.0]


def test_normalize_degenerate():
    d = Dataset([AttributeSpec('x', 'in'), AttributeSpec('y', 'out')], [[5, 0], [5, 1], [5, 2]])
    params = pump_dataset.fitNormalizer(d)
    normalized = params.apply(d.values)
    assert normalized[:, 0].tolist() == [0.0, 0.0, 0.0]
    assert params.invert(normalized)[:, 0].tolist() == [5.0, 5.0, 5.0]


def test_normalize_round_trip_and_extrapolation():
    d = makeDataset(40, 3)
    params = pump_dataset.fitNormalizer(d)
    normalized = params.apply(d.values)
    assert normalized.min() == pytest.approx(-1.0)
    assert normalized.max() == pytest.approx(1.0)
    assert np.max(np.abs(params.invert(normalized) - d.values)) < 1e-12
    outside = params.apply(params.maxs + params.spans)
    assert np.allclose(outside, 3.0)


def test_dataset_is_immutable():
    d = makeDataset(3)
    with pytest.raises(ValueError):
        d.values[0, 0] = 1.0


def test_dataset_digest(tmp_path):
    d = makeDataset(12, 3)
    digest = pump_dataset.datasetDigest(d)
    assert len(digest) == 16
    path = str(tmp_path / 'd.csv')
    pump_dataset.saveCsv(d, path, {'seed': 3})
    assert pump_dataset.datasetDigest(pump_dataset.loadCsv(path)) == digest
    assert pump_dataset.datasetDigest(d.subset(range(11))) != digest
    assert pump_dataset.datasetDigest(makeDataset(12, 4)) != digest
