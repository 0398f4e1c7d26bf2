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

Exception types shared by the library modules and the pump_study driver.
The driver maps them to process exit codes.

"""

class StudyError(Exception):
    """Base class of all errors raised by the pump study code"""
    exitCode = 1


class ConfigError(StudyError, ValueError):
    """Invalid run configuration or command line parameters"""
    exitCode = 2


class DataError(StudyError, ValueError):
    """Malformed input data or violated precondition on the data"""
    exitCode = 2


class NumericalError(StudyError, ArithmeticError):
    """Numerical failure: singular systems, non-finite values, degenerate fits"""
    exitCode = 3
