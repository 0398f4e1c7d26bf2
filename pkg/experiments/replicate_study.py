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

Repeat the study over several seeds and check the directional findings:

  training   3-50-2 network with Bayesian regularization on 48 noise-free
             rows reaches training MSE < 1e-6 (normalized targets) in at
             least 8 of 10 seeds
  pipeline   over full pipeline runs, for every objective, NNDA rmse <= NN
             rmse and NN mean error <= the best closed-form model, each in
             at least 60% of the runs

Takes minutes.  Per-seed measurements and check rates are logged and
written to <output root>/replicate/replication.json.  Exits 1 when a
check fails.

"""

import os
import sys
studyRoot = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(studyRoot, 'lib'))
sys.path.insert(0, studyRoot)
import settings
settings.studyRoot = studyRoot
import collect_args
import design_space
import neural_net
import pump_dataset
import pump_study
import run_config
from study_errors import StudyError

import collections
import json
import logging
import numpy as np

TRAINING_MSE_GOAL = 1e-6
PASS_RATE = 0.6


def trainingRun(config, seed):
    """Training MSE of the network on the train split of a noise-free study sample"""
    config = run_config.applyOverrides(config, {'seed': seed, 'oracle.noise_sigma': 0.0})
    inputs = design_space.lhsSample(run_config.designSpace(config), config['variables'], config['samples']['train'],
                                    run_config.subSeed(seed, 'sample:train'))
    data = run_config.oracle(config, 'train').evaluateDataset(inputs, config['objectives'])
    (trainIdx, valIdx, testIdx) = pump_dataset.splitIndices(data.numRows, run_config.splitSpec(config))
    train = data.subset(trainIdx)
    inputNorm = pump_dataset.fitNormalizer(train, train.inputNames)
    outputNorm = pump_dataset.fitNormalizer(train, config['objectives'])
    nn = config['models']['nn']
    topology = neural_net.MlpTopology(len(train.inputNames), nn['hidden'], len(config['objectives']), nn['activation'])
    trainConfig = neural_net.TrainConfig(maxEpochs=nn['epochs'], seed=run_config.subSeed(seed, 'nn'), logEvery=0)
    (weights, report) = neural_net.trainBayesianRegularization(
        topology, inputNorm.apply(train.inputMatrix()), outputNorm.apply(train.columns(config['objectives'])), trainConfig)
    logging.warning('seed %d: %d training rows, best mse %g at epoch %d', seed, train.numRows, report.bestMse, report.bestEpoch)
    return report.bestMse


def pipelineRun(config, seed):
    """Per-objective measurements of one full pipeline run

    Returns:
        {objective: {'nn_rmse', 'nnda_rmse', 'nn_mean_error', 'closed_form_mean_error'}},
        or {'error': message} when the run failed
    """
    config = run_config.applyOverrides(config, {'seed': seed, 'augmentation.enabled': True,
                                                'output_dir': os.path.join('replicate', 'seed%d' % seed)})
    try:
        reports = pump_study.Study(config).pipeline()
    except StudyError as e:
        logging.warning('seed %d: pipeline failed: %s', seed, e)
        return {'error': str(e)}
    models = reports['models']
    augmented = reports['augmentation']
    closedForm = [k for k in ('rsf', 'rbf', 'krg') if k in config['models']]
    outcome = collections.OrderedDict()
    for objective in config['objectives']:
        outcome[objective] = {
            'nn_rmse': augmented.row('nn', objective).rmseScaledPct,
            'nnda_rmse': augmented.row('nnda', objective).rmseScaledPct,
            'nn_mean_error': models.row('nn', objective).meanError,
            'closed_form_mean_error': min(models.row(k, objective).meanError for k in closedForm),
        }
        logging.warning('seed %d %s: nn rmse %.3f%%, nnda rmse %.3f%%, nn mean error %.3f%%, best closed-form %.3f%%',
                        seed, objective, outcome[objective]['nn_rmse'], outcome[objective]['nnda_rmse'],
                        outcome[objective]['nn_mean_error'], outcome[objective]['closed_form_mean_error'])
    return outcome


def summarizeOutcomes(seeds, outcomes, objectives, passRate=PASS_RATE):
    """Pass rate of each directional check over the runs

    A failed run counts against every check.  Checks are nnda_<objective>
    (NNDA rmse <= NN rmse) and nn_mean_error_<objective> (NN mean error <=
    the best closed-form model).
    """
    checks = collections.OrderedDict()
    for objective in objectives:
        for (key, better, worse) in (('nnda_', 'nnda_rmse', 'nn_rmse'),
                                     ('nn_mean_error_', 'nn_mean_error', 'closed_form_mean_error')):
            passed = [seed for (seed, o) in zip(seeds, outcomes) if objective in o and o[objective][better] <= o[objective][worse]]
            rate = len(passed) / float(len(seeds)) if seeds else 0.0
            checks[key + objective] = {'rate': rate, 'passed_seeds': passed, 'ok': rate >= passRate}
    checks['failed_seeds'] = [seed for (seed, o) in zip(seeds, outcomes) if 'error' in o]
    return checks


def main():
    reqArgs = []
    optArgs = [
        ["c", "config", "(optional) YAML run config"],
        ["n", "numSeeds", "(optional) number of seeds (default 10)", int, 10],
        ["f", "firstSeed", "(optional) first seed (default 1)", int, 1],
        ["t", "training", "(optional) specify any value to run only the training check"],
        ["p", "pipeline", "(optional) specify any value to run only the pipeline check"],
    ]
    args = collect_args.collectArgs(reqArgs, optionalArgs=optArgs)
    config = run_config.loadConfig(args.config)
    seeds = list(range(args.firstSeed, args.firstSeed + args.numSeeds))
    summary = collections.OrderedDict([('seeds', seeds)])

    if not args.pipeline:
        mses = [trainingRun(config, seed) for seed in seeds]
        passed = sum(m < TRAINING_MSE_GOAL for m in mses)
        summary['training'] = {'best_mse': mses, 'passed': passed, 'ok': passed >= int(np.ceil(0.8 * len(seeds)))}
        logging.warning('Training check: %d of %d seeds below %g -> %s', passed, len(seeds), TRAINING_MSE_GOAL,
                        'PASS' if summary['training']['ok'] else 'FAIL')

    if not args.training:
        outcomes = [pipelineRun(config, seed) for seed in seeds]
        checks = summarizeOutcomes(seeds, outcomes, config['objectives'])
        for (key, check) in checks.items():
            if key != 'failed_seeds':
                logging.warning('Pipeline check %s: %.0f%% of runs -> %s', key, 100 * check['rate'], 'PASS' if check['ok'] else 'FAIL')
        summary['pipeline'] = checks
        summary['runs'] = collections.OrderedDict((str(seed), o) for (seed, o) in zip(seeds, outcomes))

    outDir = os.path.join(os.environ.get(settings.outputRootEnvVar) or settings.outputRoot, 'replicate')
    os.makedirs(outDir, exist_ok=True)
    with open(os.path.join(outDir, 'replication.json'), 'w') as f:
        json.dump(summary, f, indent=1)
        f.write('\n')
    failed = [k for (k, v) in summary.get('pipeline', {}).items() if isinstance(v, dict) and not v['ok']]
    if 'training' in summary and not summary['training']['ok']:
        failed.insert(0, 'training')
    if failed:
        logging.warning('Failed checks: %s', ', '.join(failed))
        return 1
    return 0


if __name__=="__main__":
    sys.exit(main())
