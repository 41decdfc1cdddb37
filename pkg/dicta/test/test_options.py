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
Unit tests for L{options}.
"""

import os

from twisted.trial.unittest import TestCase

from dicta.errors import ConfigError
from dicta import options


class Test_Interpolate(TestCase):
    def setUp(self):
        self.saved = os.environ.get('DICTA_TEST_VAR')
        os.environ['DICTA_TEST_VAR'] = "secret"

    def tearDown(self):
        if self.saved is None:
            os.environ.pop('DICTA_TEST_VAR', None)
        else: os.environ['DICTA_TEST_VAR'] = self.saved
    
    def test_nested(self):
        self.assertEqual(
            options.interpolate({
                'a': "key-${DICTA_TEST_VAR}", 'b': ["${DICTA_TEST_VAR}", 3],
                'c': 1.5}),
            {'a': "key-secret", 'b': ["secret", 3], 'c': 1.5})

    def test_unset(self):
        os.environ.pop('DICTA_UNSET_VAR', None)
        self.assertRaises(
            ConfigError, options.interpolate, "x${DICTA_UNSET_VAR}")

    def test_notAVariable(self):
        self.assertEqual(options.interpolate("$5 and ${}"), "$5 and ${}")


class Test_Opts(TestCase):
    def setUp(self):
        self.opts = options.Opts()

    def writeConfig(self, text):
        filePath = self.mktemp()
        with open(filePath, 'w') as fh:
            fh.write(text)
        return filePath

    def test_defaults(self):
        self.assertEqual(self.opts['model'], "gpt-4o-mini")
        self.assertEqual(self.opts['temperature'], 0.0)
        self.assertEqual(self.opts['trainSize'], 15)
        self.assertEqual(self.opts['testSize'], 35)
        self.assertEqual(self.opts['maxIterations'], 8)
        self.assertIs(self.opts.validate(), self.opts)

    def test_listsAreCopies(self):
        sections = self.opts['todSections']
        sections.append("Background")
        self.assertEqual(len(self.opts['todSections']), 2)
        self.assertNotIn("Background", options.Opts()['todSections'])

    def test_fromFile(self):
        os.environ['DICTA_TEST_MODEL'] = "local-model"
        self.addCleanup(os.environ.pop, 'DICTA_TEST_MODEL', None)
        filePath = self.writeConfig(
            "model: ${DICTA_TEST_MODEL}\n"
            "seed: 7\n"
            "todSections: [Order/Summary]\n")
        opts = options.Opts.fromFile(filePath)
        self.assertEqual(opts['model'], "local-model")
        self.assertEqual(opts['seed'], 7)
        self.assertEqual(opts['todSections'], ["Order/Summary"])
        self.assertEqual(opts['testSize'], 35)

    def test_fromFileEmpty(self):
        opts = options.Opts.fromFile(self.writeConfig(""))
        self.assertEqual(opts['seed'], 0)

    def test_fromFileErrors(self):
        self.assertRaises(ConfigError, options.Opts.fromFile, self.mktemp())
        self.assertRaises(
            ConfigError, options.Opts.fromFile,
            self.writeConfig("- just\n- a list\n"))
        self.assertRaises(
            ConfigError, options.Opts.fromFile,
            self.writeConfig("model: [unclosed\n"))
        self.assertRaises(
            ConfigError, options.Opts.fromFile,
            self.writeConfig("noSuchOption: 1\n"))

    def test_unknownKey(self):
        def setIt():
            self.opts['bogus'] = 1
        self.assertRaises(ConfigError, setIt)

    def test_localOverridesGlobal(self):
        self.opts['seed'] = 3
        self.opts.newLocal()
        self.assertEqual(self.opts['seed'], 3)
        self.opts.update({'seed': 9, 'model': None})
        self.assertEqual(self.opts['seed'], 9)
        self.assertEqual(self.opts['model'], "gpt-4o-mini")
        self.assertEqual(self.opts.get('seed'), 9)
        self.assertIsNone(self.opts.get('bogus'))
        self.opts.goGlobal()
        self.assertEqual(self.opts['seed'], 3)

    def test_contains(self):
        self.assertIn('seed', self.opts)
        self.assertNotIn('bogus', self.opts)

    def test_path(self):
        self.assertIsNone(self.opts.path('gold'))
        self.opts['gold'] = "~/gold.json"
        self.assertEqual(
            self.opts.path('gold'), os.path.expanduser("~/gold.json"))

    def test_repr(self):
        self.opts.newLocal()
        self.opts['seed'] = 5
        text = repr(self.opts)
        self.assertIn("seed  0 (5)", text)

    def checkInvalid(self, **kw):
        opts = options.Opts()
        opts.update(kw)
        self.assertRaises(ConfigError, opts.validate)
        
    def test_validate(self):
        self.checkInvalid(temperature=-0.1)
        self.checkInvalid(temperature="hot")
        self.checkInvalid(mode="offline")
        self.checkInvalid(mode="record")
        self.checkInvalid(mode="replay", fixtures=self.mktemp())
        self.checkInvalid(gold=self.mktemp())
        self.checkInvalid(trainSize=0)
        self.checkInvalid(parallelism=1.5)
        self.checkInvalid(maxIterations=-1)
        self.checkInvalid(pPositive=1.2)
        self.checkInvalid(requestsPerSecond=0)
        self.checkInvalid(invalidLabelPolicy="ignore")

    def test_validateReplay(self):
        filePath = self.writeConfig("")
        self.opts.update({'mode': "replay", 'fixtures': filePath})
        self.opts.validate()
        self.opts.update({'mode': "record", 'fixtures': self.mktemp()})
        self.opts.validate()
        self.opts['maxIterations'] = 0
        self.opts.validate()
