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

Simple wrapper around argparse that supports a data driven (array specs) vs.
argparse's code driven specs to parse arguments.  Each spec is a list
[shortName, longName, helpText, type, default] where type and default are
optional.

"""

import argparse
import logging
import sys

def addArgSpecs(parser, requiredArgs, optionalArgs):
    for arg in requiredArgs+optionalArgs:
        parser.add_argument('-'+arg[0], '--'+arg[1], help=arg[2],
                            type=arg[3] if len(arg)>3 else None,
                            default=arg[4] if len(arg)>4 else None)


def checkRequired(parser, vargs, requiredArgs):
    missing = [arg[1] for arg in requiredArgs if vargs.get(arg[1]) == None]
    if missing:
        # exits with status 2
        parser.error('missing required parameters: ' + ', '.join(missing))


def logArgs(vargs, argSpecs):
    logging.warning('Using these parameters')
    for arg in argSpecs:
        if vargs.get(arg[1]) != None:
            logging.warning(arg[2]+ ': ' + str(vargs[arg[1]]))


# internal function for pytest that accepts cmdArgs parameter and no defaults
def collectArgsInt(cmdArgs, requiredArgs, optionalArgs, parentParsers, silence):
    parser = argparse.ArgumentParser(parents=parentParsers if parentParsers != None else [])
    addArgSpecs(parser, requiredArgs, optionalArgs)
    args = parser.parse_args(cmdArgs)

    vargs = vars(args)
    checkRequired(parser, vargs, requiredArgs)
    if not silence:
        logArgs(vargs, requiredArgs+optionalArgs)
    return args


def collectArgs(requiredArgs, optionalArgs=[], parentParsers=None, silence=False):
    """Parse the process command line parameters into arguments given the specs

    Args:
        requiredArgs (list): list of required parameters
        optionalArgs (list): list of optional parameters
        parentParsers: parsers for arguments for other libraries
        silence (bool): If true, argument values are not logged
    """
    return collectArgsInt(sys.argv[1:], requiredArgs, optionalArgs, parentParsers, silence)


def collectCommandArgsInt(cmdArgs, commands, silence):
    """Parse a subcommand followed by its parameters

    Args:
        cmdArgs (list): command line words (without program name)
        commands (dict): command name -> (helpText, requiredArgs, optionalArgs)
        silence (bool): If true, argument values are not logged

    Returns:
        argparse.Namespace with attribute 'command' naming the chosen subcommand
    """
    parser = argparse.ArgumentParser()
    subparsers = parser.add_subparsers(dest='command')
    subParserMap = {}
    for name, (helpText, requiredArgs, optionalArgs) in commands.items():
        subParser = subparsers.add_parser(name, help=helpText)
        addArgSpecs(subParser, requiredArgs, optionalArgs)
        subParserMap[name] = subParser
    args = parser.parse_args(cmdArgs)
    if not args.command:
        parser.error('a command is required: ' + ', '.join(commands.keys()))

    (helpText, requiredArgs, optionalArgs) = commands[args.command]
    vargs = vars(args)
    checkRequired(subParserMap[args.command], vargs, requiredArgs)
    if not silence:
        logging.warning('Command: %s', args.command)
        logArgs(vargs, requiredArgs+optionalArgs)
    return args


def collectCommandArgs(commands, silence=False):
    return collectCommandArgsInt(sys.argv[1:], commands, silence)
