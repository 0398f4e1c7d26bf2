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

Experiment driver of the pump surrogate study.  One subcommand per stage:

    sample           Latin Hypercube design points -> dataset/<name>_inputs.csv
    evaluate-oracle  oracle outputs for an input CSV -> dataset/<name>.csv
    train            fit one model kind -> models/<label>.json
    predict          model predictions for an input CSV
    compare          score models on a test CSV -> reports/, plots/
    augment          nearest-gap augmentation of a dataset CSV
    sensitivity      one-at-a-time design variable screen -> reports/sensitivity.json
    pipeline         all of the above: 4 models on the study samples, NN vs NNDA

Outputs go under $PUMP_STUDY_OUTPUT (or settings.outputRoot) / output_dir.
Exit codes: 0 success, 2 usage/config/data error, 3 numerical failure.

"""

import os
import sys
studyRoot = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(studyRoot, 'lib'))
sys.path.insert(0, studyRoot)
import settings
settings.studyRoot = studyRoot
import augmentation
import collect_args
import design_space
import metrics
import pump_dataset
import run_config
import surrogate
from study_errors import DataError, StudyError

import collections
import json
import logging


def listArg(value):
    return [v.strip() for v in value.split(',') if v.strip()] if value else None


def pointArg(value):
    point = collections.OrderedDict()
    for item in listArg(value) or []:
        (name, sep, number) = item.partition('=')
        try:
            point[name.strip()] = float(number)
        except ValueError:
            raise DataError('bad design point entry ' + item)
    return point


class Study(object):
    """Stages of one run; every artifact carries the config digest and seed"""

    def __init__(self, config):
        self.config = config
        self.header = run_config.header(config)
        self.stage = 'config'

    def path(self, subDir, fileName):
        dirName = os.path.join(run_config.outputDir(self.config), subDir)
        os.makedirs(dirName, exist_ok=True)
        return os.path.join(dirName, fileName)

    def writeJson(self, path, data):
        with open(path, 'w') as f:
            json.dump(data, f, indent=1, sort_keys=True)
            f.write('\n')
        logging.warning('Wrote %s', path)

    def sample(self, name, count, variables=None, path=None):
        """LHS design points of the configured variables, seeded by the named stream"""
        self.stage = 'sample'
        variables = variables or self.config['variables']
        space = run_config.designSpace(self.config)
        seed = run_config.subSeed(self.config['seed'], 'sample:' + name)
        dataset = design_space.lhsSample(space, variables, count, seed)
        dataset = dataset.withValues(dataset.values, dict(self.header, sample=name))
        pump_dataset.saveCsv(dataset, path or self.path('dataset', name + '_inputs.csv'))
        return dataset

    def evaluate(self, inputs, path=None, outputs=None):
        """Oracle outputs for every row; the noise stream follows the sample name"""
        self.stage = 'evaluate-oracle'
        name = inputs.metadata.get('sample', 'data')
        oracle = run_config.oracle(self.config, streamName=name)
        dataset = oracle.evaluateDataset(inputs, outputs or self.config['objectives'])
        dataset = dataset.withValues(dataset.values, dict(dataset.metadata, **self.header))
        pump_dataset.saveCsv(dataset, path or self.path('dataset', name + '.csv'))
        return dataset

    def nnRows(self, data, augmented=False):
        """(train, val) rows of the network: the train split of data, tripled
        by augmentation over the train split alone when augmented"""
        (trainIdx, valIdx, testIdx) = pump_dataset.splitIndices(data.numRows, run_config.splitSpec(self.config))
        train = data.subset(trainIdx)
        if augmented:
            train = augmentation.augment(train, run_config.augmentConfig(self.config)).toDataset()
        return (train, data.subset(valIdx))

    def rbfCenters(self, data, label, objectives, params):
        """Center count chosen on the split's validation rows among the configured candidates"""
        (trainIdx, valIdx, testIdx) = pump_dataset.splitIndices(data.numRows, run_config.splitSpec(self.config))
        if not len(valIdx):
            raise DataError('rbf center selection needs validation rows, check split.val')
        params = dict(params)
        params.pop('centers')
        (best, scores) = surrogate.selectRbfCenters(data.subset(trainIdx), data.subset(valIdx), objectives,
                                                    run_config.rbfCenterCandidates(self.config),
                                                    params.get('width_rule', 'median'), params.get('width'),
                                                    run_config.subSeed(self.config['seed'], 'rbf'))
        self.writeJson(self.path('reports', label + '_centers.json'),
                       {'header': self.header, 'centers': best,
                        'rmse_conventional': collections.OrderedDict((str(k), v) for k, v in scores.items())})
        return best

    def train(self, data, kind, label=None, objectives=None, augmented=False):
        """Fit one model kind.  The network trains on the train split only,
        optionally on its augmented rows (NNDA)."""
        self.stage = 'train'
        objectives = objectives or self.config['objectives']
        params = run_config.modelParams(self.config, kind)
        seed = run_config.subSeed(self.config['seed'], kind)
        label = label or ('nnda' if augmented else kind)
        if augmented and kind != 'nn':
            raise DataError('augmented training applies to the nn model only')
        if kind == 'nn':
            if augmented:
                self.stage = 'augment'
            (train, val) = self.nnRows(data, augmented)
            self.stage = 'train'
            predictor = surrogate.fitSurrogate('nn', train, objectives, params, seed, val)
        else:
            if kind == 'rbf' and params.get('centers') == 'auto':
                params['centers'] = self.rbfCenters(data, label, objectives, params)
            predictor = surrogate.fitSurrogate(kind, data, objectives, params, seed)
        modelHeader = dict(self.header, train_digest=pump_dataset.datasetDigest(data))
        predictor.save(self.path('models', label + '.json'), modelHeader)
        for key, report in predictor.trainReports.items():
            self.writeJson(self.path('reports', '%s_%s_training.json' % (label, key)),
                           {'header': modelHeader, 'training': report.toDict()})
        return predictor

    def predict(self, predictor, inputs, path):
        self.stage = 'predict'
        predicted = predictor.predictDataset(inputs)
        attributes = [a for a in inputs.attributes if a.name in predictor.inputNames]
        attributes += [pump_dataset.AttributeSpec(o, pump_dataset.OUTPUT) for o in predictor.objectives]
        values = [list(inputs.columns(predictor.inputNames)[i]) + [predicted[o][i] for o in predictor.objectives]
                  for i in range(inputs.numRows)]
        dataset = pump_dataset.Dataset(attributes, values, self.header)
        pump_dataset.saveCsv(dataset, path)
        return dataset

    def compare(self, predictors, test, name):
        """Score labeled models on the test rows and write the report and plot tables"""
        self.stage = 'compare'
        datasets = collections.OrderedDict([('test', pump_dataset.datasetDigest(test))])
        for label, predictor in predictors.items():
            datasets[label + '_train'] = predictor.header.get('train_digest')
        header = dict(self.header, config=self.config, test=test.metadata.get('sample', 'test'), datasets=datasets)
        report = metrics.compare(predictors, test, header)
        report.saveJson(self.path('reports', name + '.json'))
        report.saveCsv(self.path('reports', name + '.csv'))
        for objective in report.objectives:
            report.savePlotCsv(objective, self.path('plots', '%s_%s.csv' % (name, objective)))
        return report

    def augment(self, data, path, force=False, provenance=False):
        self.stage = 'augment'
        augmented = augmentation.augment(data, run_config.augmentConfig(self.config), force)
        dataset = augmented.toDataset()
        dataset = dataset.withValues(dataset.values, dict(dataset.metadata, **self.header))
        pump_dataset.saveCsv(dataset, path, commentColumns=augmented.commentColumns() if provenance else None)
        return augmented

    def sensitivity(self, perturbation=0.02, aggregate='max', point=None):
        self.stage = 'sensitivity'
        space = run_config.designSpace(self.config)
        defaults = space.midpoint()
        if point:
            for name in point:
                space.variable(name)
            defaults.update(point)
        else:
            logging.warning('No default point given, probing around the range midpoints')
        result = design_space.sensitivity(run_config.oracle(self.config, streamName='sensitivity'), space,
                                          defaults, perturbation, aggregate=aggregate)
        self.writeJson(self.path('reports', 'sensitivity.json'), {'header': self.header, 'sensitivity': result.toDict()})
        return result

    def pipeline(self):
        """Sample, evaluate, fit every enabled model, compare, then NN vs NNDA

        Returns:
            dict report name -> ValidationReport
        """
        samples = self.config['samples']
        train = self.evaluate(self.sample('train', samples['train']))
        test = self.evaluate(self.sample('test', samples['test']))
        predictors = collections.OrderedDict()
        for kind in ('rsf', 'rbf', 'krg', 'nn'):
            if kind in self.config['models']:
                predictors[kind] = self.train(train, kind)
        reports = collections.OrderedDict()
        reports['models'] = self.compare(predictors, test, 'models')
        if self.config['augmentation']['enabled'] and 'nn' in predictors:
            (nnTrain, nnVal) = self.nnRows(train)
            augmented = self.augment(nnTrain, self.path('dataset', 'train_augmented.csv'), provenance=True)
            logging.warning('Augmented %d train split rows to %d rows', nnTrain.numRows, augmented.numRows)
            nnda = self.train(train, 'nn', augmented=True)
            reports['augmentation'] = self.compare(collections.OrderedDict([('nn', predictors['nn']), ('nnda', nnda)]),
                                                   test, 'augmentation')
        return reports


commonArgs = [
    ["c", "config", "(optional) YAML run config (default: built-in study settings)"],
    ["s", "seed", "(optional) run seed overriding the config", int],
    ["o", "outputDir", "(optional) output directory under the output root"],
]

commands = collections.OrderedDict([
    ('sample', ("Latin Hypercube design points", [
        ["n", "count", "number of samples", int],
    ], commonArgs + [
        ["v", "vars", "(optional) comma separated design variables (default from config)"],
        ["m", "name", "(optional) sample set name (default: train)"],
        ["f", "file", "(optional) output CSV path"],
    ])),
    ('evaluate-oracle', ("fill oracle outputs for an input CSV", [
        ["i", "input", "input CSV of design points"],
    ], commonArgs + [
        ["f", "file", "(optional) output CSV path"],
        ["r", "flowRatio", "(optional) operating flow as a fraction of the design flow", float],
        ["u", "outputs", "(optional) comma separated oracle outputs (head,power,efficiency)"],
    ])),
    ('train', ("fit one surrogate model kind", [
        ["i", "input", "training dataset CSV"],
        ["k", "kind", "model kind: rsf, rbf, krg or nn"],
    ], commonArgs + [
        ["l", "label", "(optional) model label (default: kind)"],
        ["j", "objectives", "(optional) comma separated objectives"],
        ["a", "augment", "(optional) specify any value to train the nn on augmented rows (NNDA)"],
    ])),
    ('predict', ("predict outputs of a dataset with a saved model", [
        ["m", "model", "model JSON file"],
        ["i", "input", "dataset CSV (input attributes are used)"],
        ["f", "file", "output CSV path"],
    ], commonArgs)),
    ('compare', ("score saved models on a test dataset", [
        ["m", "models", "comma separated model JSON files"],
        ["t", "test", "test dataset CSV"],
    ], commonArgs + [
        ["l", "labels", "(optional) comma separated model labels (default: file names)"],
        ["n", "name", "(optional) report name (default: comparison)"],
    ])),
    ('augment', ("nearest-gap augmentation of a dataset", [
        ["i", "input", "dataset CSV"],
    ], commonArgs + [
        ["f", "file", "(optional) output CSV path"],
        ["x", "interpolationFactor", "(optional) interpolation factor", float],
        ["p", "pairing", "(optional) plus_minus or independent"],
        ["F", "force", "(optional) specify any value to augment an already augmented dataset"],
        ["P", "provenance", "(optional) specify any value to write #source and #sign columns"],
    ])),
    ('sensitivity', ("relative sensitivity of every design variable", [], commonArgs + [
        ["e", "perturbation", "(optional) relative perturbation (default 0.02)", float],
        ["g", "aggregate", "(optional) max or sum over outputs (default max)"],
        ["d", "point", "(optional) default design point as name=value pairs separated by commas (default: range midpoints)"],
    ])),
    ('pipeline', ("run the full study", [], commonArgs)),
])


def loadRunConfig(args):
    vargs = vars(args)
    config = run_config.loadConfig(args.config)
    overrides = {
        'seed': args.seed,
        'output_dir': args.outputDir,
        'variables': listArg(vargs.get('vars')),
        'oracle.flow_ratio': vargs.get('flowRatio'),
        'augmentation.interpolation_factor': vargs.get('interpolationFactor'),
        'augmentation.pairing': vargs.get('pairing'),
    }
    return run_config.applyOverrides(config, overrides)


def runCommand(study, args):
    vargs = vars(args)
    if args.command == 'sample':
        name = args.name or 'train'
        study.sample(name, args.count, listArg(args.vars), args.file)
    elif args.command == 'evaluate-oracle':
        study.stage = 'evaluate-oracle'
        study.evaluate(pump_dataset.loadCsv(args.input), args.file, listArg(args.outputs))
    elif args.command == 'train':
        study.stage = 'train'
        study.train(pump_dataset.loadCsv(args.input), args.kind, args.label, listArg(args.objectives), bool(args.augment))
    elif args.command == 'predict':
        study.stage = 'predict'
        study.predict(surrogate.SurrogatePredictor.load(args.model), pump_dataset.loadCsv(args.input), args.file)
    elif args.command == 'compare':
        study.stage = 'compare'
        paths = listArg(args.models)
        labels = listArg(args.labels) or [os.path.splitext(os.path.basename(p))[0] for p in paths]
        if len(labels) != len(paths):
            raise DataError('%d labels for %d models' % (len(labels), len(paths)))
        predictors = collections.OrderedDict((l, surrogate.SurrogatePredictor.load(p)) for (l, p) in zip(labels, paths))
        study.compare(predictors, pump_dataset.loadCsv(args.test), args.name or 'comparison')
    elif args.command == 'augment':
        study.stage = 'augment'
        data = pump_dataset.loadCsv(args.input)
        path = args.file or study.path('dataset', data.metadata.get('sample', 'data') + '_augmented.csv')
        study.augment(data, path, bool(vargs.get('force')), bool(vargs.get('provenance')))
    elif args.command == 'sensitivity':
        study.sensitivity(args.perturbation or 0.02, args.aggregate or 'max', pointArg(args.point))
    elif args.command == 'pipeline':
        study.pipeline()


def main(cmdArgs=None):
    args = collect_args.collectCommandArgsInt(sys.argv[1:] if cmdArgs == None else cmdArgs, commands, False)
    study = None
    try:
        study = Study(loadRunConfig(args))
        logging.warning('Run digest %s seed %d', study.header['digest'], study.header['seed'])
        runCommand(study, args)
    except StudyError as e:
        logging.error('stage %s failed: %s', study.stage if study else 'config', e)
        return e.exitCode
    except OSError as e:
        logging.error('stage %s failed: %s', study.stage if study else 'config', e)
        return 2
    return 0


if __name__=="__main__":
    sys.exit(main())
