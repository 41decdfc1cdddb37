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
Unit tests for L{chart}.
"""

import io

from twisted.trial.unittest import TestCase

from dicta import evaluation, optimizer
from dicta.chart import Charter


class Test_Charter(TestCase):
    def isPNG(self, data):
        self.assertEqual(data[:8], b"\x89PNG\r\n\x1a\n")
    
    def test_barMetrics(self):
        report = evaluation.Report(
            rows=[evaluation.rowFor(x, y)
                  for x, y in evaluation.REFERENCE_ROWS.items()],
            n=35, positives=13)
        fh = io.BytesIO()
        Charter().barMetrics(report, fh=fh)
        self.isPNG(fh.getvalue())

    def test_traceCurve(self):
        trace = optimizer.OptimizationTrace(
            feature_id='punitive_component', method='agentic_tod',
            iterations=[
                optimizer.Iteration(
                    prompt_version=k, train_accuracy=acc, best_accuracy=best,
                    accepted=accepted)
                for k, (acc, best, accepted) in enumerate([
                    (0.8, 0.8, True), (0.6, 0.8, False),
                    (0.9, 0.9, True), (1.0, 1.0, True)])])
        filePath = self.mktemp()
        Charter(figSize=(4, 3)).traceCurve(trace, filePath)
        with open(filePath, 'rb') as fh:
            self.isPNG(fh.read())
