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
Scoring extraction results against gold labels: confusion counts,
accuracy/precision/recall/F1, the random baseline's expectation and
simulation, the train/test split, and the method comparison report.
"""

import itertools, logging
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from dicta import util
from dicta.errors import IdMismatch, EmptyEvaluation, UnresolvedLabel
from dicta.extraction import normalizeLabel
from dicta.util import sub


log = logging.getLogger(__name__)

POLICIES = ('as_negative', 'as_error')
COLUMNS = ('acc', 'pre', 'rec', 'f1')
DISPLAY_NAMES = {
    'random': "Random Baseline",
    'vanilla': "Vanilla LLM",
    'cot': "CoT",
    'agentic': "Agentic LLM",
    'agentic_tod': "Agentic LLM + ToD",
}
# Published results on the 35-case test set, which has 13 positives
REFERENCE_ROWS = {
    'random': (0.517, 0.370, 0.423, 0.392),
    'vanilla': (0.714, 0.565, 1.000, 0.722),
    'cot': (0.714, 0.571, 0.923, 0.706),
    'agentic': (0.657, 0.522, 0.923, 0.667),
    'agentic_tod': (0.771, 0.619, 1.000, 0.765),
}


class ConfusionCounts(BaseModel):
    tp: int = Field(default=0, ge=0)
    fp: int = Field(default=0, ge=0)
    fn: int = Field(default=0, ge=0)
    tn: int = Field(default=0, ge=0)

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn

    @property
    def positives(self):
        return self.tp + self.fn


class Metrics(BaseModel):
    accuracy: float = Field(ge=0.0, le=1.0)
    precision: float = Field(ge=0.0, le=1.0)
    recall: float = Field(ge=0.0, le=1.0)
    f1: float = Field(ge=0.0, le=1.0)

    def values(self):
        return (self.accuracy, self.precision, self.recall, self.f1)

    def rounded(self, places=3):
        return Metrics(**{
            name: round(value, places)
            for name, value in self.model_dump().items()})


class SplitConfig(BaseModel):
    train_size: int = Field(default=15, gt=0)
    test_size: int = Field(default=35, gt=0)
    seed: int = 0


def predictionMap(results):
    """
    Returns a dict of labels keyed by document ID from I{results},
    which may already be such a dict or be a sequence of
    L{extraction.ExtractionResult} objects.
    """
    if isinstance(results, dict):
        return {k: normalizeLabel(v) for k, v in results.items()}
    return {x.doc_id: x.label for x in results}

def isGoldPositive(gold, positive_label):
    if isinstance(gold, bool): return gold
    return normalizeLabel(gold) == positive_label


def confusion(
        predictions, golds, positive_label="true",
        not_addressed_policy='as_negative'):
    """
    Returns the L{ConfusionCounts} of I{predictions} (labels or results,
    see L{predictionMap}) against I{golds}, a dict of bools or labels
    keyed by document ID.

    A prediction of "not addressed" is negative under the default
    I{not_addressed_policy} and raises L{UnresolvedLabel} under
    C{as_error}.

    @raise IdMismatch: If the two sides cover different documents.
    """
    if not_addressed_policy not in POLICIES:
        raise ValueError(sub(
            "Unknown policy '{}' for 'not addressed'", not_addressed_policy))
    predictions = predictionMap(predictions)
    missing = set(golds) - set(predictions)
    extra = set(predictions) - set(golds)
    if missing or extra:
        raise IdMismatch(missing, extra)
    counts = dict(tp=0, fp=0, fn=0, tn=0)
    for docID in sorted(golds):
        label = predictions[docID]
        if label == 'not addressed' and not_addressed_policy == 'as_error':
            raise UnresolvedLabel(sub(
                "Document {} was labeled 'not addressed'", docID))
        predicted = label == positive_label
        actual = isGoldPositive(golds[docID], positive_label)
        key = ("t" if predicted == actual else "f") + (
            "p" if predicted else "n")
        counts[key] += 1
    return ConfusionCounts(**counts)

def ratio(numerator, denominator, ifZero):
    if denominator == 0: return ifZero
    return float(numerator) / denominator

def harmonic(precision, recall):
    total = precision + recall
    if total == 0: return 0.0
    return 2*precision*recall / total

def metrics(counts):
    """
    Returns the L{Metrics} for I{counts}.

    Precision with no positive predictions (tp+fp = 0) is 1.0 when
    there was nothing to find (fn = 0) and 0.0 otherwise. Recall with
    no actual positives (tp+fn = 0) mirrors that, keyed on the other
    error: it is 1.0 when nothing was wrongly flagged (fp = 0) and 0.0
    otherwise. So a run with only true negatives scores 1.0 on both.

    @raise EmptyEvaluation: If I{counts} has no documents.
    """
    total = counts.total
    if total == 0:
        raise EmptyEvaluation("No documents to evaluate")
    tp, fp, fn, tn = counts.tp, counts.fp, counts.fn, counts.tn
    precision = ratio(tp, tp+fp, 1.0 if fn == 0 else 0.0)
    recall = ratio(tp, tp+fn, 1.0 if fp == 0 else 0.0)
    return Metrics(
        accuracy=float(tp+tn) / total, precision=precision,
        recall=recall, f1=harmonic(precision, recall))


def checkProbability(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(sub("{} {} is not in [0, 1]", name, value))

def expected_random_metrics(p_positive, class_prior):
    """
    Returns L{Metrics} for a predictor that independently says C{true}
    with probability I{p_positive} on documents that are positive with
    probability I{class_prior}.

    Accuracy is the exact expectation. Precision and recall are ratios
    of the expected counts, which work out to the prior and the
    prediction rate, with the zero-division conventions of L{metrics}.
    """
    p, q = p_positive, class_prior
    checkProbability("Prediction rate", p)
    checkProbability("Class prior", q)
    accuracy = p*q + (1-p)*(1-q)
    precision = q if p > 0 else (1.0 if q == 0 else 0.0)
    recall = p if q > 0 else (1.0 if p == 0 else 0.0)
    return Metrics(
        accuracy=accuracy, precision=precision, recall=recall,
        f1=harmonic(precision, recall))

def simulate_random(p_positive, class_prior, N, seed=0):
    """
    Returns the L{Metrics} of one seeded realization of the random
    baseline on I{N} simulated documents.
    """
    checkProbability("Prediction rate", p_positive)
    checkProbability("Class prior", class_prior)
    rng = np.random.default_rng(seed)
    actual = rng.random(N) < class_prior
    predicted = rng.random(N) < p_positive
    return metrics(ConfusionCounts(
        tp=int(np.sum(predicted & actual)),
        fp=int(np.sum(predicted & ~actual)),
        fn=int(np.sum(~predicted & actual)),
        tn=int(np.sum(~predicted & ~actual))))


def solve_confusion(row, N=35, positives=13, tolerance=0.001):
    """
    Returns a list of every L{ConfusionCounts} over I{N} documents with
    I{positives} actual positives whose L{metrics} match the
    (accuracy, precision, recall, F1) values of I{row} to within
    I{tolerance}.
    """
    if not 0 <= positives <= N:
        raise ValueError(sub(
            "Positive count {:d} is not in [0, {:d}]", positives, N))
    solutions = []
    negatives = N - positives
    for tp, fp in itertools.product(
            range(positives+1), range(negatives+1)):
        counts = ConfusionCounts(
            tp=tp, fp=fp, fn=positives-tp, tn=negatives-fp)
        values = metrics(counts).values()
        if all([abs(x-y) <= tolerance for x, y in zip(values, row)]):
            solutions.append(counts)
    return solutions


def split_documents(ids, config=None):
    """
    Returns a 2-tuple of sorted lists with the training and test
    document IDs drawn from I{ids} by a seeded permutation of the
    sorted IDs, sized per the L{SplitConfig} I{config}.
    """
    if config is None: config = SplitConfig()
    ids = sorted(set(ids))
    needed = config.train_size + config.test_size
    if needed > len(ids):
        raise ValueError(sub(
            "Split needs {:d} documents but only {:d} are available",
            needed, len(ids)))
    rng = np.random.default_rng(config.seed)
    order = [ids[k] for k in rng.permutation(len(ids))]
    train = sorted(order[:config.train_size])
    test = sorted(order[config.train_size:needed])
    return train, test


class Row(BaseModel):
    method: str
    acc: float
    pre: float
    rec: float
    f1: float

    def values(self):
        return (self.acc, self.pre, self.rec, self.f1)


class Report(BaseModel):
    """
    The method comparison, rounded to three decimal places. I list the
    methods that have the best value in each column (more than one on a
    tie) and, when the random baseline is present, its closed-form
    expectation.
    """
    rows: list[Row] = Field(min_length=1)
    n: int
    positives: int
    best: dict[str, list[str]] = Field(default_factory=dict)
    random_expected: Optional[Row] = None

    @model_validator(mode='after')
    def markBest(self):
        if not self.best:
            for k, column in enumerate(COLUMNS):
                top = max([x.values()[k] for x in self.rows])
                self.best[column] = [
                    x.method for x in self.rows if x.values()[k] == top]
        return self

    def row(self, method):
        for row in self.rows:
            if row.method == method: return row
        raise KeyError(method)
    
    def text(self):
        """
        Returns the report as a plain-text table, best values starred.
        """
        width = max(
            [len(DISPLAY_NAMES.get(x.method, x.method)) for x in self.rows])
        width = max(width, len("Method"))
        lines = [sub("{:<{}}  {:>7}{:>7}{:>7}{:>7}",
                     "Method", width, "ACC", "PRE", "REC", "F1")]
        lines.append("-" * len(lines[0]))
        for row in self.rows:
            cells = []
            for column, value in zip(COLUMNS, row.values()):
                mark = "*" if row.method in self.best[column] else " "
                cells.append(sub("{:.3f}{}", value, mark))
            lines.append(sub(
                "{:<{}}  {:>7}{:>7}{:>7}{:>7}",
                DISPLAY_NAMES.get(row.method, row.method), width, *cells))
        lines.append("")
        lines.append(sub("N = {:d}, positives = {:d}", self.n, self.positives))
        if self.random_expected is not None:
            lines.append(sub(
                "Random baseline expectation: ACC {:.3f}, PRE {:.3f}, "
                "REC {:.3f}, F1 {:.3f}", *self.random_expected.values()))
        return "\n".join(lines) + "\n"

    def toJSON(self):
        return self.model_dump(mode='json', exclude_none=True)


def rowFor(method, values):
    return Row(method=method, **dict(zip(COLUMNS, values)))

def compare(
        results, golds, positive_label="true",
        not_addressed_policy='as_negative', p_positive=0.4):
    """
    Returns a L{Report} comparing the methods whose results (see
    L{predictionMap}) are in the dict I{results}, keyed by method name,
    against the gold labels in I{golds}.

    Methods appear in their standard order, then any others in sorted
    order.
    """
    if not results:
        raise ValueError("Need results from at least one method to compare")
    order = [x for x in DISPLAY_NAMES if x in results]
    order.extend(sorted([x for x in results if x not in DISPLAY_NAMES]))
    rows = []
    for method in order:
        counts = confusion(
            results[method], golds, positive_label, not_addressed_policy)
        values = metrics(counts).rounded().values()
        rows.append(rowFor(method, values))
        log.info(
            "%s: ACC %.3f, PRE %.3f, REC %.3f, F1 %.3f",
            DISPLAY_NAMES.get(method, method), *values)
    N = len(golds)
    positives = sum([isGoldPositive(x, positive_label) for x in golds.values()])
    expected = None
    if 'random' in results:
        expected = rowFor('random', expected_random_metrics(
            p_positive, float(positives) / N).rounded().values())
    return Report(
        rows=rows, n=N, positives=positives, random_expected=expected)

def save_report(report, filePath):
    util.writeJSON(filePath, report.toJSON())

def load_report(filePath):
    return Report.model_validate(util.readJSON(filePath))
