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
Extraction of a feature label from an opinion, by any of five
methods:

    - B{random}: A seeded coin flip, no model at all.
    - B{vanilla}: One call with the whole opinion.
    - B{cot}: One call asking for step-by-step reasoning, with the
      verdict appended as JSON.
    - B{agentic}: A plan is written from an optimizable L{PlanPrompt}
      and carried out step by step over the opinion, followed by one
      reflection pass and the verdict.
    - B{agentic_tod}: The same plan executor, but working from the
      damages-related sections and discourse-supported explanations
      of key EDUs, and citing those EDUs as evidence.
"""

import re, json, logging
from typing import Literal, NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, \
    model_validator

from dicta.errors import ConfigError, MissingOpinionBody, VerdictNotFound, \
    PlanEmpty, EvidenceUnresolved
from dicta import util, templates, sectioning, discourse
from dicta.util import sub


log = logging.getLogger(__name__)

LABELS = ('true', 'false', 'not addressed')
METHODS = ('random', 'vanilla', 'cot', 'agentic', 'agentic_tod')
LLM_METHODS = METHODS[1:]

TOD_SECTIONS = (
    "Analysis of the Relief and Damages",
    "Order/Summary",
)
KEYWORDS = (
    "willful", "deter", "punish", "punitive", "statutory damages",
    "504(c)", "enhanced", "$",
)
AGENTIC_INPUTS = "- The full text of the judicial opinion."
TOD_INPUTS = (
    "- The sections of the judicial opinion that analyze relief and "
    "damages or state the court's order.\n"
    "- Discourse-supported explanations: numbered elementary discourse "
    "units (EDUs) from those sections, each with an explanation of how "
    "it fits into the rhetorical structure of the opinion.")


class FeatureDefinition(BaseModel):
    id: str
    name: str
    definition_text: str = Field(min_length=1)
    label_space: tuple[str, ...] = LABELS


PUNITIVE = FeatureDefinition(
    id="punitive_component", name="Punitive component",
    definition_text=templates.default['punitive'])
FEATURES = {PUNITIVE.id: PUNITIVE}


def feature(featureID):
    """
    Returns the L{FeatureDefinition} with I{featureID}.
    """
    if featureID not in FEATURES:
        raise ConfigError(sub(
            "Unknown feature '{}', not one of {}",
            featureID, ", ".join(sorted(FEATURES))))
    return FEATURES[featureID]

def normalizeLabel(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        text = re.sub(r'[\s_]+', " ", value.strip().strip('"').lower())
        if text in ('not addressed', 'not_addressed', 'n/a'):
            return 'not addressed'
        return text
    return value

def isPositive(label):
    """
    Returns C{True} if I{label} is the positive class. "not addressed"
    counts as negative.
    """
    return label == 'true'


class Lineage(BaseModel):
    parent_version: int = Field(ge=0)
    rationale: str = ""


class PlanPrompt(BaseModel):
    """
    The prompt that asks the model for an extraction plan. The seed
    prompt is version 0 and each accepted revision is one version up
    from its parent.
    """
    feature_id: str
    version: int = Field(default=0, ge=0)
    text: str = Field(min_length=1)
    lineage: Optional[Lineage] = None

    @classmethod
    def seed(cls, featureDef=PUNITIVE, prompts=templates.default):
        return cls(feature_id=featureDef.id, text=prompts['plan_seed'])

    def revised(self, text, rationale):
        return PlanPrompt(
            feature_id=self.feature_id, version=self.version+1, text=text,
            lineage=Lineage(parent_version=self.version, rationale=rationale))


class Plan(BaseModel):
    feature_id: str
    steps: list[str] = Field(min_length=1)


class ExtractionResult(BaseModel):
    """
    A predicted I{label} for one document and feature, with the
    I{reasoning} given for it and, for the C{agentic_tod} method only,
    the I{evidence} subtree as a dict (see L{discourse.RstSubtree}).
    """
    doc_id: str
    feature_id: str
    method: Literal['random', 'vanilla', 'cot', 'agentic', 'agentic_tod']
    label: Literal['true', 'false', 'not addressed']
    reasoning: str = ""
    evidence: Optional[dict] = None

    @model_validator(mode='after')
    def methodRules(self):
        if self.evidence is not None and self.method != 'agentic_tod':
            raise ValueError(sub(
                "Method '{}' can't have evidence", self.method))
        if self.method in LLM_METHODS and not self.reasoning.strip():
            raise ValueError(sub(
                "Method '{}' needs reasoning", self.method))
        return self

    @property
    def positive(self):
        return isPositive(self.label)
    
    def subtree(self):
        if self.evidence is not None:
            return discourse.RstSubtree.fromDict(self.evidence)


class VerdictReply(BaseModel):
    label: Literal['true', 'false', 'not addressed']
    reasoning: str = Field(min_length=1)
    evidence_edus: list[int] = Field(default_factory=list)

    @field_validator('label', mode='before')
    @classmethod
    def normalized(cls, value):
        return normalizeLabel(value)


class PlanReply(BaseModel):
    steps: list[str]

class ReflectionReply(BaseModel):
    consistent: bool
    issues: str = ""
    revised_steps: list[str] = Field(default_factory=list)


def jsonObjects(text):
    """
    Returns a list of every JSON object that can be decoded starting at
    some C{{} in I{text}, in order, skipping those nested in an
    earlier one.
    """
    decoder = json.JSONDecoder()
    found = []
    k = 0
    while True:
        k = text.find("{", k)
        if k < 0: break
        try:
            obj, end = decoder.raw_decode(text, k)
        except ValueError:
            k += 1
            continue
        if isinstance(obj, dict):
            found.append(obj)
        k = end
    return found

def lastVerdict(text):
    """
    Returns a L{VerdictReply} from the last JSON object in I{text} that
    is a valid verdict.

    @raise VerdictNotFound: If there is none.
    """
    for obj in reversed(jsonObjects(text)):
        try:
            return VerdictReply.model_validate(obj)
        except ValidationError:
            continue
    raise VerdictNotFound(sub(
        "No JSON verdict in the model's reply ({:d} characters)", len(text)))

def opinionFor(doc, gateway, prompts, contextChars):
    """
    Returns the opinion text of I{doc} to put in a prompt: the text
    itself if it fits in I{contextChars}, or else the model's
    summaries of it, a paragraph-aligned chunk at a time.
    """
    text = doc.opinion_text.strip()
    if not text:
        raise MissingOpinionBody(sub("Document '{}' has no text", doc.id))
    if len(text) <= contextChars: return text
    chunks = [x for x in util.paragraphChunks(text, contextChars) if x.strip()]
    log.warning(
        "Opinion %s has %d characters, summarizing it in %d parts",
        doc.id, len(text), len(chunks))
    summaries = []
    for k, chunk in enumerate(chunks):
        request = gateway.request(prompts.render('summarize', {
            'Part Number': k+1, 'Part Count': len(chunks),
            'Judicial Opinion': chunk.strip()}))
        summaries.append(sub(
            "[Summary of part {:d} of {:d}]\n{}", k+1, len(chunks),
            gateway.complete(request).text.strip()))
    return "\n\n".join(summaries)

def run_vanilla(
        doc, featureDef, gateway, prompts=templates.default,
        contextChars=400000):
    """
    Returns an L{ExtractionResult} from a single call with the whole
    opinion of I{doc}, replying with a JSON verdict.
    """
    text = opinionFor(doc, gateway, prompts, contextChars)
    request = gateway.request(
        prompts.render('vanilla', {'Judicial Opinion': text}))
    verdict = gateway.complete_json(request, VerdictReply)
    return ExtractionResult(
        doc_id=doc.id, feature_id=featureDef.id, method='vanilla',
        label=verdict.label, reasoning=verdict.reasoning)

def run_cot(
        doc, featureDef, gateway, prompts=templates.default,
        contextChars=400000):
    """
    Returns an L{ExtractionResult} from a single chain-of-thought call.
    The verdict is the last valid JSON verdict object in the reply.

    @raise VerdictNotFound: If the reply has no verdict in it.
    """
    text = opinionFor(doc, gateway, prompts, contextChars)
    request = gateway.request(
        prompts.render('cot', {'Judicial Opinion': text}))
    verdict = lastVerdict(gateway.complete(request).text)
    return ExtractionResult(
        doc_id=doc.id, feature_id=featureDef.id, method='cot',
        label=verdict.label, reasoning=verdict.reasoning)


class PlanExecutor(object):
    """
    I have the model write a plan from a L{PlanPrompt} and then carry
    it out in one conversation: the task material and the plan, then
    each step in turn (or all steps in one call, if I{stepCalls} is
    C{False}), one reflection that may revise the remaining work, and
    finally the verdict.
    """
    noFindings = "(no findings)"
    
    def __init__(self, gateway, prompts=templates.default, stepCalls=True):
        self.gateway = gateway
        self.prompts = prompts
        self.stepCalls = stepCalls

    @staticmethod
    def cleanSteps(steps):
        return [x.strip() for x in steps if x and x.strip()]
    
    def plan(self, featureDef, prompt, inputs):
        """
        Returns the L{Plan} the model writes from I{prompt} for feature
        I{featureDef}, given a description of the I{inputs} it will
        work from.

        @raise PlanEmpty: If the plan has no steps, even after asking
            again.
        """
        text = templates.render(prompt.text, {
            'Feature Name': featureDef.name,
            'Feature Definition': featureDef.definition_text,
            'Available Inputs': inputs,
        }, strict=False)
        request = self.gateway.request(text, self.prompts['plan_format'])
        reply = self.gateway.complete_json(request, PlanReply)
        steps = self.cleanSteps(reply.steps)
        if not steps:
            log.info("Plan from prompt v%d has no steps, asking again",
                     prompt.version)
            request = request.withRepair(
                json.dumps({'steps': reply.steps}),
                "The plan has no steps. Write a plan with at least one "
                "step. Output only the JSON object and nothing else.")
            steps = self.cleanSteps(
                self.gateway.complete_json(request, PlanReply).steps)
        if not steps:
            raise PlanEmpty(sub(
                "Plan prompt v{:d} for '{}' yields no steps",
                prompt.version, featureDef.id))
        return Plan(feature_id=featureDef.id, steps=steps)

    def numbered(self, steps):
        return "\n".join([
            sub("{:d}. {}", k+1, x) for k, x in enumerate(steps)])
    
    def say(self, request, content):
        """
        Returns I{request} extended by user I{content} and the model's
        reply to it, starting a new conversation if I{request} is
        C{None}.
        """
        if request is None:
            request = self.gateway.request(content)
        else: request = request.withMessage('user', content)
        text = self.gateway.complete(request).text.strip()
        return request.withMessage('assistant', text or self.noFindings)
    
    def carryOut(self, request, steps, preamble=None):
        if not self.stepCalls:
            parts = [preamble] if preamble else []
            if request is not None:
                parts.append(sub("Revised plan:\n{}", self.numbered(steps)))
            parts.append(self.prompts['plan_single'])
            return self.say(request, "\n\n".join(parts))
        for k, step in enumerate(steps):
            content = self.prompts.render('execute_step', {
                'Step Number': k+1, 'Step Count': len(steps), 'Step': step})
            if preamble:
                content = preamble + "\n\n" + content
                preamble = None
            request = self.say(request, content)
        return request
    
    def execute(self, task, plan, final="final"):
        """
        Carries out I{plan} on the I{task} text and returns the model's
        L{VerdictReply}, using the template named I{final} to ask for
        it.
        """
        context = self.prompts.render('plan_context', {
            'Task': task, 'Plan': self.numbered(plan.steps)})
        request = self.carryOut(None, plan.steps, context)
        request = request.withMessage('user', self.prompts['reflect'])
        reflection = self.gateway.complete_json(request, ReflectionReply)
        request = request.withMessage(
            'assistant', reflection.model_dump_json())
        revised = self.cleanSteps(reflection.revised_steps)
        if not reflection.consistent and revised:
            log.info(
                "Reflection found inconsistencies, carrying out %d revised "
                "steps", len(revised))
            request = self.carryOut(request, revised)
        request = request.withMessage('user', self.prompts[final])
        return self.gateway.complete_json(request, VerdictReply)


def run_agentic(
        doc, featureDef, prompt, gateway, prompts=templates.default,
        stepCalls=True, contextChars=400000):
    """
    Returns an L{ExtractionResult} from a plan written with I{prompt}
    and carried out over the whole opinion of I{doc}.

    @raise PlanEmpty: If no plan with steps can be had.
    @raise SchemaViolation: If a JSON reply never fits its schema.
    """
    text = opinionFor(doc, gateway, prompts, contextChars)
    executor = PlanExecutor(gateway, prompts, stepCalls)
    plan = executor.plan(featureDef, prompt, AGENTIC_INPUTS)
    task = prompts.render('vanilla', {'Judicial Opinion': text})
    verdict = executor.execute(task, plan)
    return ExtractionResult(
        doc_id=doc.id, feature_id=featureDef.id, method='agentic',
        label=verdict.label, reasoning=verdict.reasoning)

def keywordScore(text):
    text = text.lower()
    return sum(text.count(x) for x in KEYWORDS)

def candidateEdus(tree, sections, maxCandidates=12):
    """
    Returns a sorted list of the IDs of up to I{maxCandidates} EDUs of
    I{tree} found in I{sections}, those with the most statutory-damage
    keywords chosen first. If no EDU is found in the sections, all
    EDUs are candidates.
    """
    haystack = util.normalize(" ".join([x.content for x in sections]))
    edus = [
        x for x in tree.edus if util.normalize(x.text) in haystack]
    if not edus:
        log.warning(
            "No EDUs of %s found in its selected sections, ranking all",
            tree.doc_id)
        edus = tree.edus
    ranked = sorted(edus, key=lambda x: (-keywordScore(x.text), x.id))
    return sorted([x.id for x in ranked[:maxCandidates]])

def discourseExplanations(
        tree, candidates, gateway, prompts=templates.default):
    """
    Returns the text block of discourse-supported explanations for the
    EDU IDs in I{candidates}: each EDU quoted with its number, followed
    by the model's explanation of its path to the root.
    """
    blocks = []
    for eduID in candidates:
        text = tree.edu(eduID).text
        path = discourse.path_to_root(tree, eduID)
        explanation = discourse.verbalize(path, tree, text, gateway, prompts)
        blocks.append(sub('[EDU {:d}] "{}"\n{}', eduID, text, explanation))
    return "\n\n".join(blocks)

reQuoted = re.compile(u'["“]([^"“”]{12,}?)["”]')

def resolveEvidence(tree, verdict):
    """
    Returns the EDU IDs that I{verdict} rests on: those it cites by
    number or, if it cites none that exist, those whose text its
    reasoning quotes.

    @raise EvidenceUnresolved: If there are none.
    """
    N = len(tree.edus)
    ids = sorted({x for x in verdict.evidence_edus if 1 <= x <= N})
    if len(ids) < len(set(verdict.evidence_edus)):
        log.warning(
            "Ignoring cited EDUs outside 1-%d in %s", N, tree.doc_id)
    if not ids:
        quotes = [
            util.normalize(x) for x in reQuoted.findall(verdict.reasoning)]
        for edu in tree.edus:
            text = util.normalize(edu.text)
            if any(x in text or text in x for x in quotes):
                ids.append(edu.id)
    if not ids:
        raise EvidenceUnresolved(sub(
            "Reasoning for {} cites no locatable EDU", tree.doc_id))
    return ids

def run_agentic_tod(
        doc, seg, tree, featureDef, prompt, gateway,
        prompts=templates.default, stepCalls=True,
        wanted=TOD_SECTIONS, maxCandidates=12):
    """
    Returns an L{ExtractionResult} from a plan written with I{prompt}
    and carried out over the sections of I{seg} with labels in
    I{wanted}, plus verbalized discourse paths of candidate EDUs of
    I{tree}. The result's evidence is the subtree of I{tree} spanning
    the EDUs the verdict rests on, or absent with a warning if those
    can't be found.
    """
    sections = sectioning.select_sections(seg, wanted)
    if not sections:
        log.warning(
            "No sections of %s labeled %s, using all sections",
            doc.id, " or ".join(wanted))
        sections = seg.sections
    candidates = candidateEdus(tree, sections, maxCandidates)
    task = prompts.render('tod', {
        'Judicial Opinion': "\n\n".join([x.content for x in sections]),
        'Linearized Tree-Of-Discourse': discourseExplanations(
            tree, candidates, gateway, prompts),
    })
    executor = PlanExecutor(gateway, prompts, stepCalls)
    plan = executor.plan(featureDef, prompt, TOD_INPUTS)
    verdict = executor.execute(task, plan, "final_tod")
    evidence = None
    try:
        ids = resolveEvidence(tree, verdict)
    except EvidenceUnresolved as e:
        log.warning("%s; evidence omitted", e)
    else:
        subtree = discourse.extract_subtree(tree, ids)
        evidence = discourse.validate_subtree(subtree, tree).toDict()
    return ExtractionResult(
        doc_id=doc.id, feature_id=featureDef.id, method='agentic_tod',
        label=verdict.label, reasoning=verdict.reasoning, evidence=evidence)

def run_random(golds, p_positive=0.4, seed=0, feature_id=PUNITIVE.id):
    """
    Returns a list of L{ExtractionResult} objects for the document IDs
    in I{golds}, in order, each labeled C{true} with probability
    I{p_positive} from a generator seeded with I{seed}.
    """
    if not 0.0 <= p_positive <= 1.0:
        raise ValueError(sub(
            "Probability {} is not in [0, 1]", p_positive))
    ids = list(golds)
    rng = np.random.default_rng(seed)
    draws = rng.random(len(ids)) < p_positive
    reasoning = sub("Random label, P(true) = {:g}", p_positive)
    return [
        ExtractionResult(
            doc_id=docID, feature_id=feature_id, method='random',
            label="true" if draw else "false", reasoning=reasoning)
        for docID, draw in zip(ids, draws)]


class Artifacts(NamedTuple):
    """
    Everything extraction can use for one document.
    """
    doc: object
    seg: Optional[object] = None
    tree: Optional[object] = None


class Extractor(object):
    """
    I run one of the LLM methods on a document's L{Artifacts}, with
    settings taken once from an L{Opts} object or keywords.
    """
    def __init__(
            self, gateway, featureDef=PUNITIVE, prompts=templates.default,
            stepCalls=True, contextChars=400000, wanted=TOD_SECTIONS,
            maxCandidates=12):
        self.gateway = gateway
        self.featureDef = featureDef
        self.prompts = prompts
        self.stepCalls = stepCalls
        self.contextChars = contextChars
        self.wanted = tuple(wanted)
        self.maxCandidates = maxCandidates

    @classmethod
    def fromOptions(cls, gateway, opts):
        return cls(
            gateway, feature(opts['feature']),
            templates.Templates(opts.path('templateDir')),
            opts['stepCalls'], opts['contextChars'], opts['todSections'],
            opts['maxCandidates'])
        
    def __call__(self, method, artifacts, prompt=None):
        """
        Returns the L{ExtractionResult} of running I{method} on
        I{artifacts}, using plan prompt I{prompt} for the agentic
        methods (the seed prompt if C{None}).
        """
        doc = artifacts.doc
        if method == 'vanilla':
            return run_vanilla(
                doc, self.featureDef, self.gateway, self.prompts,
                self.contextChars)
        if method == 'cot':
            return run_cot(
                doc, self.featureDef, self.gateway, self.prompts,
                self.contextChars)
        if prompt is None:
            prompt = PlanPrompt.seed(self.featureDef, self.prompts)
        if method == 'agentic':
            return run_agentic(
                doc, self.featureDef, prompt, self.gateway, self.prompts,
                self.stepCalls, self.contextChars)
        if method == 'agentic_tod':
            if artifacts.seg is None or artifacts.tree is None:
                raise ConfigError(sub(
                    "Method 'agentic_tod' needs sections and a tree for "
                    "{}, run 'segment' and 'rst-import' first", doc.id))
            return run_agentic_tod(
                doc, artifacts.seg, artifacts.tree, self.featureDef, prompt,
                self.gateway, self.prompts, self.stepCalls, self.wanted,
                self.maxCandidates)
        raise ValueError(sub("Unknown LLM method '{}'", method))


def save_results(results, filePath):
    util.writeJSONL(filePath, [
        x.model_dump_json(exclude_none=True) for x in results])

def load_results(filePath):
    return list(util.readJSONL(
        filePath, ExtractionResult.model_validate_json))

def save_prompt(prompt, filePath):
    util.writeJSON(filePath, prompt.model_dump(mode='json'))

def load_prompt(filePath):
    try:
        return PlanPrompt.model_validate(util.readJSON(filePath))
    except ValidationError as e:
        raise ConfigError(sub("Bad plan prompt file '{}': {}", filePath, e))
