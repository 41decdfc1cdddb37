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
The plan optimizer: iterative refinement of a L{PlanPrompt} against
gold labels on a training set.

Each round runs the current prompt's plans on a fixed minibatch of
training cases. If any extraction disagrees with its gold label, the
model is shown the disagreements and asked for a revised prompt. A
revision replaces the current prompt if its accuracy is no worse. The
loop ends at perfect accuracy or when the iteration budget runs out,
and the most accurate prompt seen (the earliest, on a tie) wins.
"""

import logging
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from dicta import util, templates
from dicta.extraction import Extractor
from dicta.util import sub


log = logging.getLogger(__name__)


class TrainItem(NamedTuple):
    """
    One training case: its L{extraction.Artifacts} and the gold label
    as a bool.
    """
    artifacts: object
    gold: bool


class Budget(BaseModel):
    max_iterations: int = Field(default=8, ge=0)
    minibatch_size: int = Field(default=15, ge=1)


class Failure(BaseModel):
    doc_id: str
    predicted: str
    gold: str
    model_reasoning: str = ""


class Iteration(BaseModel):
    prompt_version: int
    train_accuracy: float
    best_accuracy: float
    accepted: bool
    failures: list[Failure] = Field(default_factory=list)
    revision_text: str = ""
    prompt_text: str = ""


class OptimizationTrace(BaseModel):
    """
    The audit trail of one optimization. The first iteration is the
    seed prompt's evaluation; each later one is a candidate revision,
    accepted or not.
    """
    feature_id: str
    method: str
    minibatch: list[str] = Field(default_factory=list)
    iterations: list[Iteration] = Field(default_factory=list)
    best_version: int = 0
    optimized: bool = False
    budget_exhausted: bool = False

    @model_validator(mode='after')
    def monotonic(self):
        best = None
        for iteration in self.iterations:
            if best is not None and iteration.best_accuracy < best:
                raise ValueError("Best-so-far accuracy decreased")
            best = iteration.best_accuracy
        return self

    def bestCurve(self):
        return [x.best_accuracy for x in self.iterations]


class RevisionReply(BaseModel):
    prompt: str = Field(min_length=1)
    rationale: str = ""


class PlanOptimizer(object):
    """
    I refine plan prompts for one feature and extraction method.

    @ivar extractor: An L{Extractor} used to run the method.
    """
    def __init__(
            self, extractor, method='agentic_tod', parallelism=1, seed=0):
        if method not in ('agentic', 'agentic_tod'):
            raise ValueError(sub(
                "Only agentic methods have plan prompts, not '{}'", method))
        self.extractor = extractor
        self.method = method
        self.parallelism = parallelism
        self.seed = seed

    @property
    def gateway(self):
        return self.extractor.gateway

    @property
    def prompts(self):
        return self.extractor.prompts

    def minibatch(self, train, size):
        """
        Returns the fixed minibatch of I{size} items from I{train}, in
        their original order, sampled with my seed.
        """
        if size >= len(train): return list(train)
        rng = np.random.default_rng(self.seed)
        indices = sorted(rng.permutation(len(train))[:size])
        return [train[k] for k in indices]
    
    def evaluate(self, prompt, items):
        """
        Returns a 2-tuple with the accuracy of I{prompt} on I{items} and
        a list of L{Failure} objects for the items it got wrong.
        """
        results = util.parallelMap(
            lambda x: self.extractor(self.method, x.artifacts, prompt),
            items, self.parallelism)
        failures = []
        for item, result in zip(items, results):
            if result.positive == item.gold: continue
            failures.append(Failure(
                doc_id=result.doc_id, predicted=result.label,
                gold="true" if item.gold else "false",
                model_reasoning=result.reasoning))
        accuracy = 1.0 - float(len(failures)) / len(items)
        log.info(
            "Plan prompt v%d: %d of %d correct", prompt.version,
            len(items) - len(failures), len(items))
        return accuracy, failures

    @staticmethod
    def failureText(failures):
        return "\n\n".join([
            sub("Case {}:\n  Expert label: {}\n  Extracted label: {}\n"
                "  Model reasoning: {}", x.doc_id, x.gold, x.predicted,
                x.model_reasoning or "(none)") for x in failures])
    
    def revise(self, prompt, failures, rejected):
        """
        Returns a new L{PlanPrompt} revised from I{prompt} by the model,
        given the I{failures} it led to and the texts of earlier
        I{rejected} revisions of it.
        """
        featureDef = self.extractor.featureDef
        if rejected:
            rejectedText = "\n\n".join([
                sub("<<<\n{}\n>>>", x) for x in rejected])
        else: rejectedText = "(none)"
        request = self.gateway.request(self.prompts.render('revise', {
            'Feature Name': featureDef.name,
            'Feature Definition': featureDef.definition_text,
            'Current Prompt': prompt.text,
            'Failures': self.failureText(failures),
            'Rejected Revisions': rejectedText}))
        reply = self.gateway.complete_json(request, RevisionReply)
        return prompt.revised(reply.prompt.strip(), reply.rationale.strip())

    def __call__(self, train, seed_prompt, budget=None):
        """
        Returns a 2-tuple with the best L{PlanPrompt} found, starting
        from I{seed_prompt}, and the L{OptimizationTrace}.
        """
        if budget is None: budget = Budget()
        if not train:
            raise ValueError("Need at least one training case to optimize")
        items = self.minibatch(train, budget.minibatch_size)
        trace = OptimizationTrace(
            feature_id=seed_prompt.feature_id, method=self.method,
            minibatch=[x.artifacts.doc.id for x in items])
        if budget.max_iterations == 0:
            log.info("No optimization budget, keeping the seed prompt")
            return seed_prompt, trace
        current = best = seed_prompt
        accuracy, failures = self.evaluate(current, items)
        bestAccuracy = accuracy
        trace.iterations.append(Iteration(
            prompt_version=current.version, train_accuracy=accuracy,
            best_accuracy=accuracy, accepted=True, failures=failures,
            prompt_text=current.text))
        rejected = []
        k = 0
        while failures and k < budget.max_iterations:
            k += 1
            candidate = self.revise(current, failures, rejected)
            cAccuracy, cFailures = self.evaluate(candidate, items)
            accepted = cAccuracy >= accuracy
            if accepted:
                current, accuracy, failures = candidate, cAccuracy, cFailures
                rejected = []
                if cAccuracy > bestAccuracy:
                    best, bestAccuracy = candidate, cAccuracy
            else:
                rejected.append(candidate.text)
            trace.iterations.append(Iteration(
                prompt_version=candidate.version, train_accuracy=cAccuracy,
                best_accuracy=bestAccuracy, accepted=accepted,
                failures=cFailures,
                revision_text=candidate.lineage.rationale,
                prompt_text=candidate.text))
            log.info(
                "Revision %d (v%d) %s at accuracy %.3f, best %.3f", k,
                candidate.version, "accepted" if accepted else "rejected",
                cAccuracy, bestAccuracy)
        trace.best_version = best.version
        trace.optimized = best is not seed_prompt
        trace.budget_exhausted = bool(failures)
        if trace.budget_exhausted:
            log.warning(
                "Optimization budget of %d iterations exhausted at "
                "accuracy %.3f", budget.max_iterations, bestAccuracy)
        return best, trace


def optimize(
        featureDef, train, seed_prompt, budget, gateway,
        method='agentic_tod', prompts=templates.default, **kw):
    """
    Returns a 2-tuple with the best L{PlanPrompt} for I{featureDef}
    found by refining I{seed_prompt} on the I{train} items
    (L{TrainItem} objects) within I{budget}, and the
    L{OptimizationTrace}. Keywords go to the L{PlanOptimizer}
    constructor.
    """
    extractor = Extractor(gateway, featureDef, prompts)
    return PlanOptimizer(extractor, method, **kw)(train, seed_prompt, budget)

def save_trace(trace, filePath):
    util.writeJSON(filePath, trace.model_dump(mode='json'))

def load_trace(filePath):
    return OptimizationTrace.model_validate(util.readJSON(filePath))
