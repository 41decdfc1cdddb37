#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# dicta:
# Discourse trees and agentic LLM extraction for judicial opinions
#
# Copyright (C) 2025 by the dicta authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the
# License. You may obtain a copy of the License at
# 
#   http://www.apache.org/licenses/LICENSE-2.0
# 
# Unless required by applicable law or agreed to in writing,
# software distributed under the License is distributed on an "AS
# IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either
# express or implied. See the License for the specific language
# governing permissions and limitations under the License.

"""
Layered configuration for the pipeline.

An L{Opts} object holds built-in defaults, overlaid by the global
options from a YAML configuration file, overlaid by local options
that come from command-line flags. Look up any option by its key and
you get the most local value that was set.
"""

import os, re, logging
from copy import copy, deepcopy

import yaml

from dicta.errors import ConfigError
from dicta.util import sub


log = logging.getLogger(__name__)

reVar = re.compile(r'\$\{([A-Za-z_][A-Za-z0-9_]*)\}')


def interpolate(value):
    """
    Returns I{value} with every C{${VAR}} in every string it contains
    (recursing into lists and dicts) replaced by the value of that
    environment variable.

    @raise ConfigError: If a referenced variable is not set.
    """
    def replacement(match):
        name = match.group(1)
        if name not in os.environ:
            raise ConfigError(sub(
                "Environment variable '{}' is referenced but not set", name))
        return os.environ[name]
    
    if isinstance(value, str):
        return reVar.sub(replacement, value)
    if isinstance(value, list):
        return [interpolate(x) for x in value]
    if isinstance(value, dict):
        return {k: interpolate(v) for k, v in value.items()}
    return value


class Opts(object):
    """
    I am a dict-like object of options. I make it easy to override
    options from a config file with ones given on the command line,
    and check that the result makes sense.

    @ivar go: A dict of global options that are set from my I{_opts}
        defaults and then from a configuration file.

    @ivar lo: A dict of local options set after a call to
        L{newLocal}, typically from command-line flags, or C{None} if
        there is no local context.
    """
    modes = ('live', 'record', 'replay')
    labelPolicies = ('reject', 'prefix')
    pathKeys = (
        'templateDir', 'splitterRules', 'metadataRules',
        'citationRules', 'gold')
    _opts = {
        'model':                "gpt-4o-mini",
        'temperature':          0.0,
        'mode':                 "live",
        'fixtures':             None,
        'baseURL':              "https://api.openai.com",
        'apiKeyEnv':            "LLM_API_KEY",
        'timeout':              60.0,
        'requestsPerSecond':    None,
        'maxRepairAttempts':    2,
        'templateDir':          None,
        'splitterRules':        None,
        'metadataRules':        None,
        'citationRules':        None,
        'gold':                 None,
        'feature':              "punitive_component",
        'trainSize':            15,
        'testSize':             35,
        'seed':                 0,
        'pPositive':            0.4,
        'outputDir':            "dicta-out",
        'parallelism':          1,
        'maxIterations':        8,
        'minibatchSize':        15,
        'maxCandidates':        12,
        'stepCalls':            True,
        'contextChars':         400000,
        'todSections': [
            "Analysis of the Relief and Damages",
            "Order/Summary",
        ],
        'invalidLabelPolicy':   "reject",
        'fallbackTrees':        False,
    }

    def __init__(self):
        self.go = deepcopy(self._opts)
        self.lo = None

    @classmethod
    def fromFile(cls, filePath):
        """
        Returns a new instance of me with global options loaded from the
        YAML file at I{filePath}, after environment interpolation.

        @raise ConfigError: If the file can't be read or parsed, isn't
            a mapping, or names an option I don't have.
        """
        self = cls()
        try:
            with open(filePath, encoding='utf-8') as fh:
                data = yaml.safe_load(fh)
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(sub("Can't load config '{}': {}", filePath, e))
        if data is None: data = {}
        if not isinstance(data, dict):
            raise ConfigError(sub(
                "Config '{}' must be a mapping of option names", filePath))
        self.update(interpolate(data))
        log.debug("Loaded config from %s", filePath)
        return self
    
    def __repr__(self):
        lines = [sub(
            "Options at {}: global (local)", hex(id(self))), "-"*50]
        for name in sorted(self.go.keys()):
            goVal = self.go[name]
            if self.lo is None or name not in self.lo:
                loVal = ""
            else: loVal = sub(" ({})", self.lo[name])
            lines.append(sub("{:>18s}  {}{}", name, goVal, loVal))
        return "\n".join(lines)
        
    def __contains__(self, key):
        if key in self.go: return True
        if self.lo is None: return False
        return key in self.lo
    
    def __setitem__(self, key, value):
        if key not in self.go:
            raise ConfigError(sub("Unknown option '{}'", key))
        if self.lo is None:
            self.go[key] = value
        else: self.lo[key] = value

    def __getitem__(self, key):
        if self.lo and key in self.lo:
            return self.lo[key]
        value = self.go[key]
        if isinstance(value, (list, dict)):
            value = copy(value)
        return value

    def get(self, key, default=None):
        return self[key] if key in self else default
    
    def update(self, mapping):
        """
        Sets each option in I{mapping} in my current context, skipping
        C{None} values so that absent command-line flags don't mask
        configured ones.
        """
        for key, value in mapping.items():
            if value is None: continue
            self[key] = value
    
    def newLocal(self):
        """
        Starts a new local options context. All further option-setting
        goes to it, and lookups check it before the global options.
        """
        self.lo = {}

    def goGlobal(self):
        """
        Drops my local context, leaving only global options.
        """
        self.lo = None

    def path(self, key):
        """
        Returns the filesystem path for option I{key}, or C{None} if it
        is unset.
        """
        value = self[key]
        if value: return os.path.expanduser(value)

    def validate(self):
        """
        Checks that my options make sense together, raising
        L{ConfigError} with a message naming the first problem found.
        Returns me for convenience.
        """
        def bad(proto, *args):
            raise ConfigError(sub(proto, *args))

        try:
            temperature = float(self['temperature'])
        except (TypeError, ValueError):
            bad("Temperature '{}' is not a number", self['temperature'])
        if temperature < 0:
            bad("Temperature must be >= 0, not {}", temperature)
        mode = self['mode']
        if mode not in self.modes:
            bad("Mode '{}' is not one of {}", mode, ", ".join(self.modes))
        fixtures = self.path('fixtures')
        if mode in ('record', 'replay') and not fixtures:
            bad("Mode '{}' needs a fixtures path", mode)
        if mode == 'replay' and not os.path.isfile(fixtures):
            bad("Fixture file '{}' does not exist", fixtures)
        for key in self.pathKeys:
            filePath = self.path(key)
            if filePath and not os.path.exists(filePath):
                bad("Path '{}' for option '{}' does not exist", filePath, key)
        for key in ('trainSize', 'testSize', 'parallelism',
                    'minibatchSize', 'maxCandidates', 'contextChars'):
            if not isinstance(self[key], int) or self[key] < 1:
                bad("Option '{}' must be a positive integer", key)
        for key in ('maxIterations', 'maxRepairAttempts'):
            if not isinstance(self[key], int) or self[key] < 0:
                bad("Option '{}' must be a non-negative integer", key)
        if not 0.0 <= float(self['pPositive']) <= 1.0:
            bad("pPositive must be in [0, 1], not {}", self['pPositive'])
        rps = self['requestsPerSecond']
        if rps is not None and float(rps) <= 0:
            bad("requestsPerSecond must be positive, not {}", rps)
        if self['invalidLabelPolicy'] not in self.labelPolicies:
            bad("invalidLabelPolicy '{}' is not one of {}",
                self['invalidLabelPolicy'], ", ".join(self.labelPolicies))
        return self
