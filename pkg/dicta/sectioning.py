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
Segmentation of an opinion into topically coherent sections and
labeling of each section with one of thirteen functional labels, in
two separate kinds of model call.
"""

import json, logging
from typing import Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from dicta.errors import ReassemblyMismatch, InvalidLabel, \
    MissingOpinionBody
from dicta import util, templates
from dicta.util import sub


log = logging.getLogger(__name__)

SECTION_LABELS = {
    "Introduction":
    "Provides an overview of the case, including the nature of the "
    "dispute and the parties involved.",
    "Procedural History":
    "Summarizes the sequence of legal actions and rulings leading up to "
    "the current decision.",
    "Background Facts":
    "Presents the factual context and events that gave rise to the "
    "legal dispute.",
    "Analysis of the Infringement":
    "Evaluates whether a copyright infringement occurred based on the "
    "presented facts and legal standards.",
    "Analysis of the Liability":
    "Determines who is legally responsible for the alleged infringement "
    "or harm.",
    "Analysis of the Relief and Damages":
    u"Describes the judge’s assessment of the remedies awarded, "
    "including monetary damages or injunctive relief.",
    "Analysis of Attorneys' Fees":
    u"Considers whether attorney’s fees should be granted and under what "
    "justification.",
    "Interpretation of the Law":
    "Explains how specific legal statutes or precedents are understood "
    "and applied in this case.",
    "Analysis of Defenses":
    "Reviews and evaluates the validity of defenses raised by the "
    "defendant, such as fair use or license.",
    "Jurisdiction and Standing":
    "Determines whether the court has the authority to hear the case and "
    "whether the parties have the right to bring the action.",
    "Order/Summary":
    "Announces the court's final judgment, summarizes the opinion, or "
    "issues a directive resolving the case.",
    "Supplementary Description or Case Information":
    "Provides any additional case-related information included by the "
    "judge.",
    "Analysis of Default Judgment":
    "Evaluates whether default judgment is procedurally justified based "
    "on the defendant's failure to respond and relevant legal standards.",
}
CUSTOM_PREFIX = "NEW_"

_canonical = {
    util.normalize(x).lower(): x for x in SECTION_LABELS}


def labelDefinitions():
    """
    Returns the label definitions as a numbered list for the
    C{{{Section Label Definitions}}} placeholder.
    """
    return "\n".join([
        sub("{:d}. {}: {}", k+1, name, definition)
        for k, (name, definition) in enumerate(SECTION_LABELS.items())])

def canonicalLabel(text):
    """
    Returns the canonical form of label I{text}: one of the thirteen
    labels exactly as listed, ignoring case and quote style, or a
    custom label with its C{NEW_} prefix. Returns C{None} for anything
    else.
    """
    text = util.normalize(text or "").strip('"')
    if text[:len(CUSTOM_PREFIX)].upper() == CUSTOM_PREFIX:
        rest = text[len(CUSTOM_PREFIX):].strip()
        return CUSTOM_PREFIX + rest if rest else None
    return _canonical.get(text.lower())

def isCustom(label):
    return label.startswith(CUSTOM_PREFIX)


class Section(BaseModel):
    index: int = Field(ge=0)
    content: str
    label: Optional[str] = None

    @field_validator('content')
    @classmethod
    def hasContent(cls, content):
        if not content.strip():
            raise ValueError("Section content is empty")
        return content

    @field_validator('label')
    @classmethod
    def knownLabel(cls, label):
        if label is None: return
        if label in SECTION_LABELS: return label
        if label.startswith(CUSTOM_PREFIX) and len(label) > 4:
            return label
        raise ValueError(sub("Label '{}' is not a section label", label))


class SegmentedOpinion(BaseModel):
    doc_id: str
    sections: list[Section]

    @model_validator(mode='after')
    def increasing(self):
        for k in range(1, len(self.sections)):
            if self.sections[k].index <= self.sections[k-1].index:
                raise ValueError("Section indices must strictly increase")
        return self

    def labels(self):
        return [x.label for x in self.sections]


class SectionItem(BaseModel):
    index: int
    content: str

class SectionsReply(BaseModel):
    result: list[SectionItem]

class LabelReply(BaseModel):
    result: str


def checkReassembly(text, contents):
    """
    Returns a list of (start, end) spans of I{text}, one for each of
    the section I{contents}, if the contents rejoin into I{text} up to
    whitespace and quote style.

    Sections are rejoined with a space only where the opinion has
    whitespace between them, so a cut with none there, as in
    C{"A.B."} split into C{"A."} and C{"B."}, still matches.

    @raise ReassemblyMismatch: If they don't, with the offset into the
        normalized text where they first differ.
    """
    normal, positions = util.normalizeMap(text)
    pieces = [util.normalize(x) for x in contents]
    joined, starts = "", []
    for piece in pieces:
        if joined and normal[len(joined):len(joined)+1] == " ":
            joined += " "
        starts.append(len(joined))
        joined += piece
    if joined != normal:
        offset = util.firstDivergence(joined, normal)
        raise ReassemblyMismatch(sub(
            "Sections differ from the opinion at normalized offset {:d}: "
            "'{}' vs '{}'", offset, joined[offset:offset+40],
            normal[offset:offset+40]), offset)
    return [
        (positions[k], positions[k+len(piece)-1] + 1)
        for k, piece in zip(starts, pieces)]

def segment(doc, gateway, prompts=templates.default, contextChars=400000):
    """
    Segments the opinion of document I{doc} into sections, with labels
    unset, using the model behind I{gateway}.

    Opinions longer than I{contextChars} are segmented a chunk at a
    time, cut at paragraph boundaries. Each section's content is the
    exact span of the opinion text the model's section corresponds to.

    @raise SchemaViolation: If the model's reply never fits the
        section-list schema.
    @raise ReassemblyMismatch: If the sections don't rejoin into the
        opinion text.
    """
    text = doc.opinion_text
    if not text.strip():
        raise MissingOpinionBody(sub("Document '{}' has no text", doc.id))
    chunks = util.paragraphChunks(text, contextChars)
    if len(chunks) > 1:
        log.info("Segmenting %s in %d chunks", doc.id, len(chunks))
    contents = []
    for chunk in chunks:
        if not chunk.strip(): continue
        request = gateway.request(prompts.render('segment', {
            'Section Label Definitions': labelDefinitions(),
            'Judicial Opinion': chunk.strip()}))
        reply = gateway.complete_json(request, SectionsReply)
        items = sorted(reply.result, key=lambda x: x.index)
        contents.extend([x.content for x in items if x.content.strip()])
    spans = checkReassembly(text, contents)
    sections = [
        Section(index=k, content=text[a:b]) for k, (a, b) in enumerate(spans)]
    log.debug("Segmented %s into %d sections", doc.id, len(sections))
    return SegmentedOpinion(doc_id=doc.id, sections=sections)

def contextFor(full_text, section, contextChars):
    """
    Returns I{full_text} if it fits in I{contextChars}, or else the
    paragraph chunk that contains the start of I{section}.
    """
    if len(full_text) <= contextChars: return full_text
    k = full_text.find(section.content)
    kStart = 0
    for chunk in util.paragraphChunks(full_text, contextChars):
        if k < kStart + len(chunk):
            return chunk
        kStart += len(chunk)
    return chunk

def label_section(
        full_text, section, gateway, prompts=templates.default,
        policy="reject", contextChars=400000):
    """
    Returns the label the model behind I{gateway} assigns to
    I{section} of the opinion I{full_text}.

    A reply that is neither one of the listed labels nor a C{NEW_}
    custom label gets one repair attempt. If that fails too, the
    I{policy} decides: C{reject} raises L{InvalidLabel}, C{prefix}
    stores the reply as a custom label.

    @raise SchemaViolation: If no reply fits the label schema.
    """
    payload = json.dumps({
        'full': contextFor(full_text, section, contextChars),
        'target_section': section.content}, ensure_ascii=False)
    request = gateway.request(prompts.render('label', {
        'Section Label Definitions': labelDefinitions(),
        'Section Content': payload}))
    reply = gateway.complete_json(request, LabelReply)
    label = canonicalLabel(reply.result)
    if label is None:
        log.info("Label '%s' is not valid, asking again", reply.result)
        request = request.withRepair(
            json.dumps({'result': reply.result}, ensure_ascii=False),
            sub('"{}" is not one of the listed labels. Answer with one '
                'label from the list exactly as written or, only if none '
                'fits, a custom label prefixed with "NEW_". Output only '
                'the JSON object and nothing else.', reply.result))
        reply = gateway.complete_json(request, LabelReply)
        label = canonicalLabel(reply.result)
    if label is None:
        if policy != 'prefix':
            raise InvalidLabel(sub(
                "Model gave invalid label '{}' for section {:d}",
                reply.result, section.index))
        label = CUSTOM_PREFIX + util.normalize(reply.result)
    if isCustom(label):
        log.warning(
            "Custom label '%s' for section %d", label, section.index)
    return label

def label_all(seg, doc, gateway, parallelism=1, **kw):
    """
    Returns a copy of the L{SegmentedOpinion} I{seg} with every section
    of it labeled, doing up to I{parallelism} sections at once.
    Keywords are passed on to L{label_section}.
    """
    labels = util.parallelMap(
        lambda x: label_section(doc.opinion_text, x, gateway, **kw),
        seg.sections, parallelism)
    sections = [
        x.model_copy(update={'label': label})
        for x, label in zip(seg.sections, labels)]
    return SegmentedOpinion(doc_id=seg.doc_id, sections=sections)

def select_sections(seg, wanted):
    """
    Returns a list of the sections of I{seg} whose label is in
    I{wanted}, in their original order.
    """
    wanted = {canonicalLabel(x) or x for x in wanted}
    return [x for x in seg.sections if x.label in wanted]

def save_segmented(segs, filePath):
    util.writeJSONL(filePath, [x.model_dump_json() for x in segs])

def load_segmented(filePath):
    """
    Returns a dict of L{SegmentedOpinion} objects, keyed by document
    ID, from the JSONL file at I{filePath}.
    """
    return {
        x.doc_id: x for x in util.readJSONL(
            filePath, SegmentedOpinion.model_validate_json)}
