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
Unit tests for L{evaluation}.
"""

import numpy as np

from twisted.trial.unittest import TestCase

from dicta import evaluation as e
from dicta.errors import IdMismatch, EmptyEvaluation, UnresolvedLabel


def labels(*args):
    return {"d{:02d}".format(k): x for k, x in enumerate(args)}

def fromCounts(tp, fp, fn, tn):
    """
    Returns predictions and golds, as dicts, with the given confusion
    counts.
    """
    pairs = [("true", True)]*tp + [("true", False)]*fp + \
        [("false", True)]*fn + [("false", False)]*tn
    return labels(*[x[0] for x in pairs]), labels(*[x[1] for x in pairs])

def bruteMetrics(tp, fp, fn, tn):
    """
    Independent re-computation of accuracy, precision, recall and F1,
    straight from the definitions.
    """
    N = tp + fp + fn + tn
    accuracy = (tp + tn) / N
    if tp + fp:
        precision = tp / (tp + fp)
    elif fn: precision = 0.0
    else: precision = 1.0
    if tp + fn:
        recall = tp / (tp + fn)
    elif fp: recall = 0.0
    else: recall = 1.0
    if precision + recall == 0:
        f1 = 0.0
    else: f1 = 2*precision*recall / (precision + recall)
    return accuracy, precision, recall, f1


class Test_Confusion(TestCase):
    def test_allCorrect(self):
        golds = labels(*([True]*13 + [False]*22))
        predictions = {k: "true" if v else "false" for k, v in golds.items()}
        counts = e.confusion(predictions, golds)
        self.assertEqual(
            (counts.tp, counts.fp, counts.fn, counts.tn), (13, 0, 0, 22))

    def test_allTrue(self):
        golds = labels(*([True]*13 + [False]*22))
        counts = e.confusion(dict.fromkeys(golds, "true"), golds)
        self.assertEqual((counts.tp, counts.fp), (13, 22))
        self.assertEqual(counts.total, 35)

    def test_bruteTally(self):
        rng = np.random.default_rng(42)
        choices = ["true", "false", "not addressed"]
        for trial in range(50):
            predictions = labels(*[
                choices[k] for k in rng.integers(0, 3, 10)])
            golds = labels(*[bool(x) for x in rng.integers(0, 2, 10)])
            tally = dict(tp=0, fp=0, fn=0, tn=0)
            for docID in golds:
                p = predictions[docID] == "true"
                g = golds[docID]
                if p and g: tally['tp'] += 1
                elif p: tally['fp'] += 1
                elif g: tally['fn'] += 1
                else: tally['tn'] += 1
            counts = e.confusion(predictions, golds)
            self.assertEqual(counts.model_dump(), tally)

    def test_notAddressed(self):
        golds = labels(True, False)
        predictions = labels("not addressed", "not addressed")
        counts = e.confusion(predictions, golds)
        self.assertEqual((counts.fn, counts.tn), (1, 1))
        self.assertRaises(
            UnresolvedLabel, e.confusion, predictions, golds,
            not_addressed_policy='as_error')
        self.assertRaises(
            ValueError, e.confusion, predictions, golds,
            not_addressed_policy='ignore')

    def test_goldLabelStrings(self):
        counts = e.confusion(labels("true"), labels("true"))
        self.assertEqual(counts.tp, 1)
    
    def test_idMismatch(self):
        golds = labels(True, False, True)
        predictions = {'d00': "true", 'd01': "false", 'x': "true"}
        try:
            e.confusion(predictions, golds)
        except IdMismatch as exc:
            self.assertEqual(exc.missing, ['d02'])
            self.assertEqual(exc.extra, ['x'])
        else: self.fail("No IdMismatch raised")

    def test_fromResults(self):
        from dicta.extraction import run_random
        golds = labels(True, False, True, False)
        results = run_random(golds, 1.0)
        counts = e.confusion(results, golds)
        self.assertEqual((counts.tp, counts.fp), (2, 2))


class Test_Metrics(TestCase):
    def assertMetrics(self, counts, expected, places=3):
        m = e.metrics(e.ConfusionCounts(**counts))
        for value, x in zip(m.values(), expected):
            self.assertAlmostEqual(value, x, delta=0.001)

    def test_agenticToD(self):
        self.assertMetrics(
            dict(tp=13, fp=8, fn=0, tn=14), (0.771, 0.619, 1.000, 0.765))

    def test_vanilla(self):
        self.assertMetrics(
            dict(tp=13, fp=10, fn=0, tn=12), (0.714, 0.565, 1.000, 0.722))

    def test_perfect(self):
        m = e.metrics(e.ConfusionCounts(tp=5, tn=7))
        self.assertEqual(m.values(), (1.0, 1.0, 1.0, 1.0))

    def test_zeroDivision(self):
        # Nothing predicted positive, nothing to find
        m = e.metrics(e.ConfusionCounts(tn=4))
        self.assertEqual((m.precision, m.recall), (1.0, 1.0))
        # Nothing predicted positive, something missed
        m = e.metrics(e.ConfusionCounts(fn=2, tn=2))
        self.assertEqual((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0))
        # No actual positives, some false alarms
        m = e.metrics(e.ConfusionCounts(fp=3, tn=1))
        self.assertEqual((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0))

    def test_recallWithNoActualPositives(self):
        # Recall's fallback depends on fp, not fn
        for fp, expected in ((0, 1.0), (1, 0.0), (6, 0.0)):
            m = e.metrics(e.ConfusionCounts(fp=fp, tn=3))
            self.assertEqual(m.recall, expected)
        # Precision's fallback depends on fn, not fp
        for fn, expected in ((0, 1.0), (2, 0.0)):
            m = e.metrics(e.ConfusionCounts(fn=fn, tn=3))
            self.assertEqual(m.precision, expected)

    def test_empty(self):
        self.assertRaises(EmptyEvaluation, e.metrics, e.ConfusionCounts())

    def test_bruteOracle(self):
        rng = np.random.default_rng(0)
        for trial in range(10000):
            tp, fp, fn, tn = [int(x) for x in rng.integers(0, 6, 4)]
            if tp + fp + fn + tn == 0: continue
            m = e.metrics(e.ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn))
            for value, x in zip(m.values(), bruteMetrics(tp, fp, fn, tn)):
                self.assertAlmostEqual(value, x, places=12)

    def test_f1Invariant(self):
        m = e.metrics(e.ConfusionCounts(tp=12, fp=9, fn=1, tn=13))
        self.assertAlmostEqual(
            m.f1, 2*m.precision*m.recall / (m.precision + m.recall))


class Test_ReferenceRows(TestCase):
    """
    Every published LLM row is reproduced by one integer confusion
    matrix over 35 test cases with 13 positives.
    """
    def test_solutions(self):
        expected = {
            'agentic_tod': (13, 8, 0, 14),
            'vanilla': (13, 10, 0, 12),
            'cot': (12, 9, 1, 13),
            'agentic': (12, 11, 1, 11),
        }
        for method, counts in expected.items():
            solutions = e.solve_confusion(e.REFERENCE_ROWS[method])
            self.assertEqual(len(solutions), 1, method)
            x = solutions[0]
            self.assertEqual((x.tp, x.fp, x.fn, x.tn), counts, method)

    def test_randomRowUnsolvable(self):
        # It is one stochastic realization, not a count over 13 positives
        self.assertEqual(e.solve_confusion(e.REFERENCE_ROWS['random']), [])

    def test_badPositives(self):
        self.assertRaises(ValueError, e.solve_confusion, (1, 1, 1, 1), 5, 6)


class Test_RandomBaseline(TestCase):
    def test_expected(self):
        m = e.expected_random_metrics(0.4, 0.4)
        self.assertAlmostEqual(m.accuracy, 0.52)
        self.assertAlmostEqual(m.precision, 0.4)
        self.assertAlmostEqual(m.recall, 0.4)

    def test_neverPositive(self):
        m = e.expected_random_metrics(0.0, 0.3)
        self.assertAlmostEqual(m.accuracy, 0.7)
        self.assertEqual((m.precision, m.recall), (0.0, 0.0))

    def test_alwaysRight(self):
        m = e.expected_random_metrics(1.0, 1.0)
        self.assertEqual(m.values(), (1.0, 1.0, 1.0, 1.0))

    def test_symmetric(self):
        for p, q in ((0.1, 0.7), (0.4, 0.37), (0.9, 0.2)):
            self.assertAlmostEqual(
                e.expected_random_metrics(p, q).accuracy,
                e.expected_random_metrics(q, p).accuracy)

    def test_simulation(self):
        m = e.simulate_random(0.4, 0.4, 100000, seed=0)
        self.assertAlmostEqual(m.accuracy, 0.52, delta=0.01)

    def test_simulationSeeded(self):
        self.assertEqual(
            e.simulate_random(0.4, 13.0/35, 35, seed=5),
            e.simulate_random(0.4, 13.0/35, 35, seed=5))

    def test_badProbability(self):
        self.assertRaises(ValueError, e.expected_random_metrics, -0.1, 0.5)


class Test_Split(TestCase):
    def setUp(self):
        self.ids = ["doc-{:02d}".format(k) for k in range(50)]

    def test_sizes(self):
        train, test = e.split_documents(self.ids)
        self.assertEqual((len(train), len(test)), (15, 35))
        self.assertEqual(set(train) & set(test), set())
        self.assertEqual(train, sorted(train))

    def test_seeded(self):
        config = e.SplitConfig(seed=3)
        shuffled = list(reversed(self.ids))
        self.assertEqual(
            e.split_documents(self.ids, config),
            e.split_documents(shuffled, config))
        self.assertNotEqual(
            e.split_documents(self.ids, config),
            e.split_documents(self.ids, e.SplitConfig(seed=4)))

    def test_tooFew(self):
        self.assertRaises(ValueError, e.split_documents, self.ids[:40])

    def test_sizesPositive(self):
        self.assertRaises(ValueError, e.SplitConfig, train_size=0)


class Test_Compare(TestCase):
    def test_dominant(self):
        predictions, golds = fromCounts(5, 1, 1, 5)
        perfect = {k: "true" if v else "false" for k, v in golds.items()}
        report = e.compare({'vanilla': predictions, 'cot': perfect}, golds)
        for column in e.COLUMNS:
            self.assertEqual(report.best[column], ['cot'])
        self.assertEqual([x.method for x in report.rows], ['vanilla', 'cot'])

    def test_single(self):
        predictions, golds = fromCounts(13, 8, 0, 14)
        report = e.compare({'agentic_tod': predictions}, golds)
        self.assertEqual(len(report.rows), 1)
        row = report.row('agentic_tod')
        self.assertEqual(row.values(), (0.771, 0.619, 1.0, 0.765))
        self.assertEqual((report.n, report.positives), (35, 13))
        self.assertIsNone(report.random_expected)

    def test_ties(self):
        a, golds = fromCounts(13, 8, 0, 14)
        b = fromCounts(13, 10, 0, 12)[0]
        report = e.compare({'vanilla': b, 'agentic_tod': a}, golds)
        self.assertEqual(report.best['rec'], ['vanilla', 'agentic_tod'])
        self.assertEqual(report.best['acc'], ['agentic_tod'])

    def test_randomExpectation(self):
        predictions, golds = fromCounts(5, 9, 8, 13)
        report = e.compare({'random': predictions}, golds)
        self.assertEqual(
            report.random_expected.values(), (0.526, 0.371, 0.4, 0.385))

    def test_text(self):
        a, golds = fromCounts(13, 8, 0, 14)
        b = fromCounts(13, 10, 0, 12)[0]
        text = e.compare({'vanilla': b, 'agentic_tod': a}, golds).text()
        lines = text.split("\n")
        self.assertIn("ACC", lines[0])
        self.assertTrue(lines[2].startswith("Vanilla LLM"))
        self.assertIn("0.771*", lines[3])
        self.assertIn("1.000*", lines[2])
        self.assertIn("N = 35, positives = 13", text)

    def test_noMethods(self):
        self.assertRaises(ValueError, e.compare, {}, labels(True))

    def test_saveLoad(self):
        predictions, golds = fromCounts(5, 9, 8, 13)
        report = e.compare({'random': predictions}, golds)
        filePath = self.mktemp()
        e.save_report(report, filePath)
        self.assertEqual(e.load_report(filePath), report)
