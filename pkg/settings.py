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

Run defaults for the pump study scripts.  Values here are overridden by the
run config file, which is overridden by command line flags.

"""

studyRoot = 'XXX/pump-study'

# output artifacts go under outputRoot unless the env var below is set
outputRoot = 'pump_study_out'
outputRootEnvVar = 'PUMP_STUDY_OUTPUT'

defaultSeed = 7

# duty point of the 10-stage pump (per stage)
dutyFlowM3h = 100.0
dutyHead = 80.0
dutySpeed = 2950.0
dutyRatedPower = 355.0

keyVariables = ['D2', 'b2', 'beta2']
objectives = ['head', 'power']
trainSamples = 60
testSamples = 10

nnLogEvery = 100 # epochs between NN progress log lines

import logging
logging.basicConfig(format='%(asctime)s.%(msecs)03d: %(process)d: %(message)s', datefmt='%F %T')
