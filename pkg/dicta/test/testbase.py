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
Shared test fixtures: data files, scripted chat endpoints, and the
three annotated cases with their expected model verdicts.
"""

import os, json

from dicta import corpus, sectioning, discourse, extraction
from dicta.gateway import Gateway, GatewayMode


DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
FROZEN = "frozen_fixtures.jsonl"


def dataPath(fileName):
    return os.path.join(DATA_DIR, fileName)

def loadData(fileName):
    with open(dataPath(fileName), encoding='utf-8') as fh:
        return json.load(fh)

def microsoftTree():
    with open(dataPath("microsoft_tree.json"), encoding='utf-8') as fh:
        return discourse.parse_tree(fh.read())


class ScriptedEndpoint(object):
    """
    I stand in for a L{gateway.ChatEndpoint}, answering each request
    with whatever my I{responder} callable returns for it and keeping
    a list of the requests I got.
    """
    usage = {'prompt_tokens': 10, 'completion_tokens': 5}
    
    def __init__(self, responder=None):
        if responder is not None:
            self.responder = responder
        self.requests = []

    def post(self, request):
        self.requests.append(request)
        return self.responder(request), dict(self.usage)


class FailingEndpoint(object):
    """
    I fail the test if anything asks me for a completion.
    """
    def post(self, request):
        raise AssertionError("Unexpected upstream call")


def gateway(responder, mode='live', fixturePath=None, **kw):
    """
    Returns a L{Gateway} in I{mode} whose upstream is a
    L{ScriptedEndpoint} with I{responder}.
    """
    return Gateway(
        GatewayMode(mode=mode, fixture_path=fixturePath),
        ScriptedEndpoint(responder), **kw)

def frozenGateway():
    """
    Returns a L{Gateway} replaying the frozen fixtures, with an upstream
    that fails the test if a request isn't among them.
    """
    return Gateway(
        GatewayMode(mode='replay', fixture_path=dataPath(FROZEN)),
        FailingEndpoint())


#--- The three annotated cases ------------------------------------------------

def cases():
    return loadData("annotated_cases.json")['cases']

def artifacts(case):
    doc = corpus.Document.model_validate(case['document'])
    seg = sectioning.SegmentedOpinion(
        doc_id=doc.id, sections=case['sections'])
    tree = discourse.parse_tree(json.dumps(case['tree']))
    return extraction.Artifacts(doc, seg, tree)

def sampleOpinion():
    """
    Returns the sample opinion behind the Microsoft tree as a
    L{corpus.Document}, and its expected sections.
    """
    data = loadData("sample_opinion.json")
    return corpus.Document.model_validate(data['document']), data['sections']


class CaseEndpoint(ScriptedEndpoint):
    """
    I play the model for the three annotated cases, recognizing the
    kind of prompt and which case it is about, and giving each
    method its recorded verdict.
    """
    plan = [
        "Find the statutory damages awarded and the provision relied on.",
        "Find any finding of willfulness.",
        "Find any statement tying the amount to punishment or deterrence.",
    ]
    
    def __init__(self, cases):
        ScriptedEndpoint.__init__(self)
        self.cases = cases

    def case(self, text):
        for case in self.cases:
            if case['marker'] in text: return case
        raise AssertionError("No known case in prompt")

    @staticmethod
    def verdictJSON(verdict, withEvidence=False):
        reply = {'label': verdict['label'], 'reasoning': verdict['reasoning']}
        if withEvidence:
            reply['evidence_edus'] = verdict.get('evidence_edus', [])
        return json.dumps(reply)
    
    def responder(self, request):
        first = request.messages[0].content
        last = request.messages[-1].content
        if "Rhetorical Structure Theory (RST)" in first:
            return (
                "This segment supports the court's conclusion on the "
                "damages award by explaining its basis.")
        if "planning how to extract" in first:
            return json.dumps({'steps': self.plan})
        if "Do not give your judgment yet" in first:
            isToD = "Discourse-Supported Explanations:" in first
            if last.startswith("Review your findings"):
                return json.dumps({
                    'consistent': True, 'issues': "", 'revised_steps': []})
            if last.startswith("You have completed the plan"):
                method = 'agentic_tod' if isToD else 'agentic'
                return self.verdictJSON(
                    self.case(first)['verdicts'][method], isToD)
            return "The opinion addresses this step."
        verdicts = self.case(first)['verdicts']
        if "Let's think step by step." in first:
            return "First, the award. Then, the reasoning.\n" + \
                self.verdictJSON(verdicts['cot'])
        return self.verdictJSON(verdicts['vanilla'])
