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
Ingestion of raw case text into a L{Corpus} of L{Document} objects,
with the citations each opinion makes and the case/statute graph they
form.

Rules for splitting, header parsing and citation matching all have
defaults for LexisNexis-style plain-text exports. Each can be replaced
from a YAML file.
"""

import os, re, logging
from datetime import date, datetime
from typing import Annotated, Literal, Optional, Union

import yaml
import networkx as nx
from pydantic import BaseModel, Field, ValidationError, field_validator, \
    model_validator

from dicta.errors import NoCasesFound, MissingOpinionBody, DanglingSource, \
    FormatError, ConfigError
from dicta import util
from dicta.util import sub


log = logging.getLogger(__name__)


def loadRules(cls, filePath):
    """
    Returns an instance of the pydantic rules class I{cls} from the
    YAML file at I{filePath}, or defaults if I{filePath} is C{None}.
    """
    if not filePath: return cls()
    try:
        with open(filePath, encoding='utf-8') as fh:
            data = yaml.safe_load(fh) or {}
        return cls.model_validate(data)
    except (OSError, yaml.YAMLError, ValidationError) as e:
        raise ConfigError(sub("Bad rules file '{}': {}", filePath, e))


#--- Documents ----------------------------------------------------------------

class Document(BaseModel):
    """
    One judicial opinion with its case metadata.

    A date that was found but couldn't be parsed is kept verbatim in
    the matching C{_raw} field rather than dropped.
    """
    id: str = Field(min_length=1)
    case_title: str = ""
    case_number: str = ""
    argued_date: Optional[date] = None
    argued_date_raw: Optional[str] = None
    decided_date: Optional[date] = None
    decided_date_raw: Optional[str] = None
    court_name: str = ""
    court_district: Optional[str] = None
    court_circuit: Optional[str] = None
    opinion_text: str

    @field_validator('opinion_text')
    @classmethod
    def hasText(cls, text):
        if not text.strip():
            raise ValueError("opinion_text is empty")
        return text


class GoldLabel(BaseModel):
    doc_id: str
    feature_id: str
    label: Literal['true', 'false']


class Corpus(BaseModel):
    documents: list[Document] = Field(default_factory=list)
    gold_labels: dict[str, dict[str, Literal['true', 'false']]] = Field(
        default_factory=dict)

    @model_validator(mode='after')
    def consistent(self):
        ids = set()
        for doc in self.documents:
            if doc.id in ids:
                raise ValueError(sub("Duplicate document id '{}'", doc.id))
            ids.add(doc.id)
        for docID in self.gold_labels:
            if docID not in ids:
                raise ValueError(sub(
                    "Gold label for unknown document '{}'", docID))
        return self

    def __len__(self):
        return len(self.documents)
    
    def ids(self):
        return [doc.id for doc in self.documents]
    
    def document(self, docID):
        for doc in self.documents:
            if doc.id == docID:
                return doc
        raise KeyError(docID)

    def golds(self, featureID):
        """
        Returns a dict of gold labels (C{True} or C{False}) for feature
        I{featureID}, keyed by document ID.
        """
        result = {}
        for docID, labels in self.gold_labels.items():
            if featureID in labels:
                result[docID] = labels[featureID] == 'true'
        return result

    def goldRecords(self):
        records = []
        for docID in sorted(self.gold_labels):
            for featureID in sorted(self.gold_labels[docID]):
                records.append(GoldLabel(
                    doc_id=docID, feature_id=featureID,
                    label=self.gold_labels[docID][featureID]))
        return records


#--- Splitting ----------------------------------------------------------------

class SplitterConfig(BaseModel):
    """
    How to cut a concatenated export into case blocks: after each line
    matching the I{delimiter} regex, or, if a I{heading} regex is
    given, before each line matching it.
    """
    delimiter: str = r'^\s*End of Document\s*$'
    heading: Optional[str] = None


def _mergeBlank(pieces, isBlank):
    blocks = []
    carry = ""
    for piece in pieces:
        if isBlank(piece):
            if blocks:
                blocks[-1] += piece
            else: carry += piece
            continue
        blocks.append(carry + piece)
        carry = ""
    if carry:
        if not blocks: return []
        blocks[-1] += carry
    return blocks

def split_cases(raw_text, splitter=None):
    """
    Splits I{raw_text} into a list of raw case blocks using the
    L{SplitterConfig} I{splitter}.

    Every block keeps its delimiter line, and whitespace or empty
    cases between delimiters are merged into a neighboring block, so
    joining the blocks gives back I{raw_text} exactly. With no
    delimiter found, the one block is the whole input.

    @raise NoCasesFound: If I{raw_text} is blank or holds no case text.
    """
    if splitter is None: splitter = SplitterConfig()
    if not raw_text.strip():
        raise NoCasesFound("No case text found in blank input")
    if splitter.heading:
        rx = re.compile(splitter.heading, re.MULTILINE)
        starts = [m.start() for m in rx.finditer(raw_text)]
        if not starts or starts[0] != 0: starts.insert(0, 0)
        starts.append(len(raw_text))
        pieces = [
            raw_text[starts[k]:starts[k+1]] for k in range(len(starts)-1)]
        isBlank = lambda x: not x.strip()
    else:
        rx = re.compile(splitter.delimiter, re.MULTILINE)
        pieces = []
        k0 = 0
        for match in rx.finditer(raw_text):
            if match.end() <= k0: continue
            pieces.append(raw_text[k0:match.end()])
            k0 = match.end()
        if k0 < len(raw_text):
            pieces.append(raw_text[k0:])
        isBlank = lambda x: not rx.sub("", x).strip()
    blocks = _mergeBlank([x for x in pieces if x], isBlank)
    if not blocks:
        raise NoCasesFound("Input has delimiters but no case text")
    log.debug("Split input into %d case blocks", len(blocks))
    return blocks


#--- Metadata -----------------------------------------------------------------

MONTH = r'(?:Jan|Feb|Mar|Apr|May|Jun|Jul|Aug|Sep|Sept|Oct|Nov|Dec)[a-z]*\.?'
DATE = MONTH + r'\s+\d{1,2},\s+\d{4}'

CIRCUITS = {
    'First': ("Maine", "Massachusetts", "New Hampshire", "Rhode Island",
              "Puerto Rico"),
    'Second': ("Connecticut", "New York", "Vermont"),
    'Third': ("Delaware", "New Jersey", "Pennsylvania", "Virgin Islands"),
    'Fourth': ("Maryland", "North Carolina", "South Carolina", "Virginia",
               "West Virginia"),
    'Fifth': ("Louisiana", "Mississippi", "Texas"),
    'Sixth': ("Kentucky", "Michigan", "Ohio", "Tennessee"),
    'Seventh': ("Illinois", "Indiana", "Wisconsin"),
    'Eighth': ("Arkansas", "Iowa", "Minnesota", "Missouri", "Nebraska",
               "North Dakota", "South Dakota"),
    'Ninth': ("Alaska", "Arizona", "California", "Guam", "Hawaii",
              "Idaho", "Montana", "Nevada", "Northern Mariana Islands",
              "Oregon", "Washington"),
    'Tenth': ("Colorado", "Kansas", "New Mexico", "Oklahoma", "Utah",
              "Wyoming"),
    'Eleventh': ("Alabama", "Florida", "Georgia"),
    'D.C.': ("Columbia",),
}
STATE_CIRCUIT = {
    state: name + " Circuit"
    for name, states in CIRCUITS.items() for state in states}


def circuitForDistrict(district):
    """
    Returns the name of the federal circuit containing the U.S. district
    named I{district}, or C{None} if no state is recognized in it.
    """
    if not district: return
    text = district.replace(u"ʻ", "").replace("'", "")
    # Longest names first so "West Virginia" wins over "Virginia"
    for state in sorted(STATE_CIRCUIT, key=len, reverse=True):
        if re.search(r'\b' + re.escape(state) + r'\b', text):
            return STATE_CIRCUIT[state]


class MetadataRules(BaseModel):
    """
    Regular expressions for the case header. Each field gets a list of
    patterns tried in order, the first match's C{value} group being
    used. The opinion body starts after the first line matching
    I{body}. If no line does, fields are only sought in the leading
    header block (up to the first blank line after some text, and
    no more than I{header_lines} lines) and the body starts after
    the last one found there.
    """
    fields: dict[str, list[str]] = {
        'case_title': [r'\A\s*(?P<value>\S[^\n]*?)\s*$'],
        'case_number': [
            r'^\s*(?:Case|Civil Action|Civ\.|Docket)\s+No\.?\s*:?\s*'
            r'(?P<value>[^\n]+?)\s*$'],
        'argued_date': [
            r'^\s*Argued\s*:?\s*(?P<value>[^\n]+?)\s*$',
            r'^\s*(?P<value>' + DATE + r'),?\s+Argued\s*$'],
        'decided_date': [
            r'^\s*(?:Decided|Filed|Date Filed|Entered)\s*:?\s*'
            r'(?P<value>[^\n]+?)\s*$',
            r'^\s*(?P<value>' + DATE + r'),?\s+(?:Decided|Filed)\s*$'],
        'court_name': [
            r'^\s*Court\s*:\s*(?P<value>[^\n]+?)\s*$',
            r'^\s*(?P<value>(?:United States|U\.\s?S\.)\s+'
            r'(?:District Court|Court of Appeals|Bankruptcy Court)'
            r'[^\n]*?)\s*$'],
        'court_district': [
            r'^\s*District\s*:\s*(?P<value>[^\n]+?)\s*$',
            r'^\s*(?:(?:United States|U\.\s?S\.)\s+[^\n]*?\s)?'
            r'(?P<value>(?:(?:Northern|Southern|Eastern|Western|Central|'
            r'Middle)\s+)?District\s+of\s+[A-Z][\w.\'ʻ]*'
            r'(?:[ \t]+[A-Z][\w.\'ʻ]*)*)[ \t]*[,.]?[ \t]*$'],
        'court_circuit': [
            r'^\s*Circuit\s*:\s*(?P<value>[^\n]+?)\s*$',
            r'^\s*(?:(?:United States|U\.\s?S\.)\s+Court\s+of\s+Appeals'
            r'\s+for\s+the\s+)?'
            r'(?P<value>(?:First|Second|Third|Fourth|Fifth|Sixth|Seventh|'
            r'Eighth|Ninth|Tenth|Eleventh|D\.C\.|Federal)\s+Circuit)'
            r'[ \t]*[,.]?[ \t]*$'],
    }
    header_lines: int = Field(default=12, ge=1)
    body: str = (
        r'^\s*(?:OPINION|MEMORANDUM(?: AND ORDER| OPINION(?: AND ORDER)?)?|'
        r'ORDER|Opinion)\s*:?\s*$')
    trailer: Optional[str] = r'^\s*End of Document\s*$'
    date_formats: list[str] = [
        "%B %d, %Y", "%b %d, %Y", "%b. %d, %Y", "%m/%d/%Y", "%Y-%m-%d",
        "%d %B %Y",
    ]


def parseDate(text, formats):
    """
    Returns a C{date} parsed from I{text} with the first of I{formats}
    that works, or C{None}.
    """
    text = util.normalize(text).rstrip(".")
    # "Sept." isn't a strptime abbreviation
    text = re.sub(r'\bSept\b\.?', "Sep", text)
    for fmt in formats:
        try:
            return datetime.strptime(text, fmt).date()
        except ValueError:
            pass

def documentID(title, number, text):
    return "doc-" + util.contentHash([title, number, text])[:16]

def headerEnd(text, maxLines):
    """
    Returns the index in I{text} where its leading header block ends:
    at the first blank line following some text, or after I{maxLines}
    non-blank lines, whichever comes first.
    """
    k = N = 0
    for line in text.splitlines(True):
        if not line.strip():
            if N: break
        else: N += 1
        k += len(line)
        if N >= maxLines: break
    return k

def extract_metadata(raw_case, rules=None):
    """
    Returns a L{Document} with the metadata and opinion text parsed
    from the raw case block I{raw_case} using the L{MetadataRules}
    I{rules}.

    Fields that aren't found are left absent, never made up. A circuit
    that isn't stated is inferred from the district's state.

    @raise MissingOpinionBody: If nothing remains after the header.
    """
    if rules is None: rules = MetadataRules()
    text = raw_case
    if rules.trailer:
        text = re.sub(rules.trailer, "", text, flags=re.MULTILINE)
    match = re.search(rules.body, text, re.MULTILINE)
    if match:
        header, body = text[:match.start()], text[match.end():]
    else: header, body = text[:headerEnd(text, rules.header_lines)], None
    values = {}
    kEnd = 0
    for name, patterns in rules.fields.items():
        for pattern in patterns:
            m = re.search(pattern, header, re.MULTILINE)
            if m:
                values[name] = m.group('value').strip()
                kEnd = max(kEnd, m.end())
                break
    if body is None: body = text[kEnd:]
    body = body.strip()
    if not body:
        raise MissingOpinionBody(sub(
            "No opinion text after the header of '{}'",
            values.get('case_title', raw_case.strip()[:60])))
    kw = {}
    for name in ('argued_date', 'decided_date'):
        raw = values.pop(name, None)
        if raw is None: continue
        kw[name] = parseDate(raw, rules.date_formats)
        if kw[name] is None:
            log.warning("Keeping unparseable %s '%s' as raw text", name, raw)
            kw[name+"_raw"] = raw
    if not values.get('court_circuit'):
        circuit = circuitForDistrict(values.get('court_district'))
        if circuit: values['court_circuit'] = circuit
    title = values.get('case_title', "")
    number = values.get('case_number', "")
    return Document(
        id=documentID(title, number, body),
        case_title=title, case_number=number,
        court_name=values.get('court_name', ""),
        court_district=values.get('court_district'),
        court_circuit=values.get('court_circuit'),
        opinion_text=body, **kw)


#--- Citations ----------------------------------------------------------------

class CaseRef(BaseModel):
    kind: Literal['case'] = 'case'
    title: str
    reporter: str

class StatuteRef(BaseModel):
    kind: Literal['statute'] = 'statute'
    key: str

class Citation(BaseModel):
    """
    One citation made by the opinion of document I{source_doc}, found
    verbatim as I{raw_text} at character I{offset} of its opinion text.
    """
    source_doc: str
    target: Annotated[
        Union[CaseRef, StatuteRef], Field(discriminator='kind')]
    raw_text: str = Field(min_length=1)
    offset: int = Field(ge=0)


class CitationRules(BaseModel):
    """
    Patterns for finding citations.

    The I{statute} regex needs groups C{title} and C{section}; a
    I{short_statute} match (a bare section sign) borrows the title of
    the nearest full statute citation before it. Case citations are
    anchored on a volume, one of the I{reporters}, and a page, with the
    case name found by walking back to a C{v.} before them.
    """
    statute: str = (
        r'(?P<title>\d+)\s+U\.\s?S\.\s?C\.?\s*(?:A\.\s*)?§§?\s*'
        r'(?P<section>\d+[a-z]?(?:\([A-Za-z0-9]+\))*)')
    short_statute: str = (
        r'§§?\s*(?P<section>\d+[a-z]?(?:\([A-Za-z0-9]+\))*)')
    reporters: list[str] = [
        "U.S.", "U. S.", "S. Ct.", "L. Ed. 2d", "L. Ed.", "F.4th", "F.3d",
        "F.2d", "F. Supp. 3d", "F. Supp. 2d", "F. Supp.", "F. App'x",
        "F. Appx", "F.", "F.R.D.", "B.R.", "Fed. Cl.", "U.S.P.Q.2d",
        "WL", "U.S. Dist. LEXIS",
    ]
    signals: list[str] = [
        "See also", "See, e.g.,", "See", "But see", "Cf.", "Accord",
        "Compare", "E.g.,", "Citing", "citing",
    ]
    abbreviations: list[str] = [
        "Corp.", "Inc.", "Co.", "Ltd.", "Bros.", "Ass'n", "Int'l", "Mfg.",
        "Dist.", "Servs.", "Prods.", "Prod.", "Ent.", "Entm't", "Univ.",
        "Nat'l", "Am.", "Gov't", "Dep't", "Sys.", "Grp.", "Publ'g",
        "Records,", "Inc.,", "L.L.C.", "LLC", "L.P.", "N.A.", "U.S.",
        "Res.", "Pub.", "Tech.", "Indus.", "Comm'n", "St.", "Mr.", "Dr.",
    ]
    max_party_words: int = 10


CONNECTORS = {"of", "the", "and", "for", "de", "&", "ex", "rel.", "in", "on"}
ENTITY_SUFFIXES = {
    "Inc.", "Inc", "Ltd.", "L.L.C.", "LLC", "Co.", "Corp.", "N.A.", "P.C.",
    "L.P.", "LLP"}


class CitationFinder(object):
    """
    I find the citations in opinion texts according to a
    L{CitationRules} object.
    """
    reV = re.compile(r'\s(?:v|vs)\.\s')
    reToken = re.compile(r'\S+')
    
    def __init__(self, rules=None):
        self.rules = rules or CitationRules()
        self.reStatute = re.compile(self.rules.statute)
        self.reShort = re.compile(self.rules.short_statute)
        reporters = sorted(self.rules.reporters, key=len, reverse=True)
        self.reReporter = re.compile(
            r',\s+(?P<volume>\d{1,4})\s+(?P<reporter>' +
            "|".join([re.escape(x) for x in reporters]) +
            r')\s+(?P<page>\d{1,7})\b')

    @staticmethod
    def statuteKey(title, section):
        return sub("{}USC{}", title, re.sub(r'\s+', "", section))
        
    def statutes(self, text):
        """
        Yields (offset, end, key) for each statute citation in I{text}.
        """
        spans = []
        fulls = []
        for m in self.reStatute.finditer(text):
            spans.append((m.start(), m.end()))
            fulls.append((m.start(), m.group('title')))
            yield m.start(), m.end(), self.statuteKey(
                m.group('title'), m.group('section'))
        for m in self.reShort.finditer(text):
            if any(a <= m.start() < b for a, b in spans):
                continue
            earlier = [x for x in fulls if x[0] < m.start()]
            if not earlier: continue
            yield m.start(), m.end(), self.statuteKey(
                earlier[-1][1], m.group('section'))

    def isPartyWord(self, token):
        if token in CONNECTORS: return True
        if not (token[0].isupper() or token[0].isdigit() or token[0] in "&'\""):
            return False
        if token[-1] in ";:)": return False
        if token.endswith(".") and len(token) > 4:
            return token in self.rules.abbreviations
        return True

    def plaintiffStart(self, text, kStart, kEnd):
        """
        Returns the offset where the plaintiff's name starts, walking
        back from the C{v.} at I{kEnd} no further than I{kStart}, or
        C{None} if there's no plausible name there.
        """
        tokens = list(self.reToken.finditer(text, kStart, kEnd))
        kept = []
        for m in reversed(tokens):
            token = m.group()
            if len(kept) >= self.rules.max_party_words: break
            if token.endswith(","):
                # "Smith, Inc. v." keeps the comma inside the name
                if not kept or kept[-1].group() not in ENTITY_SUFFIXES:
                    break
                kept.append(m)
                continue
            if not self.isPartyWord(token): break
            kept.append(m)
        while kept and kept[-1].group() in CONNECTORS:
            kept.pop()
        if not kept: return
        k = kept[-1].start()
        # Signal words aren't part of the name
        changed = True
        while changed:
            changed = False
            for signal in self.rules.signals:
                if text.startswith(signal + " ", k) or \
                   text.startswith(signal + "\n", k):
                    k = self.reToken.search(text, k + len(signal)).start()
                    changed = True
        if k >= kEnd: return
        return k
    
    def cases(self, text):
        """
        Yields (offset, end, title, reporter) for each case citation in
        I{text}.
        """
        for m in self.reReporter.finditer(text):
            kComma = m.start()
            kWindow = max(0, kComma - 300)
            vs = list(self.reV.finditer(text, kWindow, kComma))
            if not vs: continue
            v = vs[-1]
            defendant = text[v.end():kComma]
            if not defendant or not (
                    defendant[0].isupper() or defendant[0].isdigit()):
                continue
            if len(defendant.split()) > self.rules.max_party_words:
                continue
            if re.search(r'[;()\[\]]|\n\s*\n', defendant):
                continue
            kStart = self.plaintiffStart(text, kWindow, v.start()+1)
            if kStart is None: continue
            title = util.normalize(text[kStart:kComma])
            reporter = sub(
                "{} {} {}", m.group('volume'),
                m.group('reporter'), m.group('page'))
            yield kStart, m.end(), title, reporter

    def __call__(self, doc):
        text = doc.opinion_text
        found = []
        for k0, k1, key in self.statutes(text):
            found.append(Citation(
                source_doc=doc.id, target=StatuteRef(key=key),
                raw_text=text[k0:k1], offset=k0))
        for k0, k1, title, reporter in self.cases(text):
            found.append(Citation(
                source_doc=doc.id,
                target=CaseRef(title=title, reporter=reporter),
                raw_text=text[k0:k1], offset=k0))
        found.sort(key=lambda x: (x.offset, x.target.kind))
        return found


def extract_citations(doc, rules=None):
    """
    Returns a list of the L{Citation} objects found in the opinion text
    of I{doc}, in order of appearance, according to the
    L{CitationRules} I{rules}.

    Statutes get a canonical key such as C{17USC504(c)(2)}. Case
    matching is conservative: a citation is missed rather than
    invented when the case name can't be found cleanly.
    """
    return CitationFinder(rules)(doc)


#--- Graph --------------------------------------------------------------------

def titleKey(title):
    text = util.normalize(title).lower()
    return re.sub(r'[^\w&]+', " ", text).strip()


class CitationGraph(object):
    """
    I am the heterogeneous citation graph of a corpus: case and statute
    nodes, and one edge per citation from the citing case.

    @ivar graph: A C{networkx.MultiDiGraph} with a I{kind} and I{label}
        attribute on each node and I{raw_text} and I{offset} on each
        edge.
    """
    def __init__(self):
        self.graph = nx.MultiDiGraph()

    def __len__(self):
        return self.graph.number_of_nodes()

    @property
    def nodes(self):
        return list(self.graph.nodes)

    @property
    def edges(self):
        return list(self.graph.edges(data=True))
    
    def addNode(self, nodeID, kind, label):
        if nodeID not in self.graph:
            self.graph.add_node(nodeID, kind=kind, label=label)

    def addEdge(self, src, dst, citation):
        for nodeID in (src, dst):
            if nodeID not in self.graph:
                raise ValueError(sub("No graph node '{}'", nodeID))
        self.graph.add_edge(
            src, dst, raw_text=citation.raw_text, offset=citation.offset)
        
    def export(self):
        """
        Returns a JSON-ready dict with I{nodes} C{[{id, kind, label}]}
        and I{edges} C{[{src, dst, raw_text}]}.
        """
        return {
            'nodes': [
                {'id': x, 'kind': d['kind'], 'label': d['label']}
                for x, d in self.graph.nodes(data=True)],
            'edges': [
                {'src': a, 'dst': b, 'raw_text': d['raw_text']}
                for a, b, d in self.graph.edges(data=True)],
        }

    def mostCited(self, N=10):
        """
        Returns a list of up to I{N} (node ID, citation count) tuples,
        most cited first and ties broken by ID.
        """
        counts = [
            (x, d) for x, d in self.graph.in_degree() if d > 0]
        counts.sort(key=lambda x: (-x[1], x[0]))
        return counts[:N]


def build_graph(corpus, citations):
    """
    Returns a L{CitationGraph} with a node for each document of
    I{corpus}, each distinct case and statute cited, and an edge for
    each of the I{citations}.

    A cited case whose title matches a corpus document is that
    document's node. A citation of a document to itself is dropped
    with a warning.

    @raise DanglingSource: If a citation comes from a document not in
        I{corpus}.
    """
    cg = CitationGraph()
    byTitle = {}
    for doc in corpus.documents:
        cg.addNode(doc.id, 'case', doc.case_title)
        if doc.case_title:
            byTitle.setdefault(titleKey(doc.case_title), doc.id)
    for citation in citations:
        src = citation.source_doc
        if src not in cg.graph:
            raise DanglingSource(sub(
                "Citation '{}' comes from unknown document '{}'",
                citation.raw_text, src))
        target = citation.target
        if target.kind == 'statute':
            dst = "statute:" + target.key
            cg.addNode(dst, 'statute', target.key)
        else:
            key = titleKey(target.title)
            dst = byTitle.get(key, "case:" + key)
            cg.addNode(dst, 'case', target.title)
        if dst == src:
            log.warning(
                "Dropping self-citation '%s' in %s", citation.raw_text, src)
            continue
        cg.addEdge(src, dst, citation)
    return cg


#--- Persistence --------------------------------------------------------------

def goldPath(filePath):
    stem, ext = os.path.splitext(filePath)
    return stem + ".gold" + (ext or ".jsonl")

def load_gold(filePath):
    """
    Returns a gold-label dict (document ID to feature ID to label) read
    from the JSONL file at I{filePath}.
    """
    labels = {}
    for record in util.readJSONL(filePath, GoldLabel.model_validate_json):
        labels.setdefault(record.doc_id, {})[record.feature_id] = record.label
    return labels

def save_gold(corpus, filePath):
    util.writeJSONL(filePath, [
        x.model_dump_json() for x in corpus.goldRecords()])
    
def save_corpus(corpus, filePath):
    """
    Writes I{corpus} to I{filePath} as JSONL, one document per line,
    and its gold labels, if any, to a C{.gold.jsonl} file beside it.
    """
    util.writeJSONL(filePath, [
        doc.model_dump_json() for doc in corpus.documents])
    if corpus.gold_labels:
        save_gold(corpus, goldPath(filePath))

def load_corpus(filePath):
    """
    Returns a L{Corpus} read from the JSONL file at I{filePath}, with
    gold labels from a C{.gold.jsonl} file beside it if there is one.

    @raise FormatError: With the line number of a bad line.
    """
    documents = list(util.readJSONL(filePath, Document.model_validate_json))
    labels = {}
    filePathGold = goldPath(filePath)
    if os.path.exists(filePathGold):
        labels = load_gold(filePathGold)
    try:
        return Corpus(documents=documents, gold_labels=labels)
    except ValidationError as e:
        raise FormatError(sub("Inconsistent corpus '{}': {}", filePath, e))

def ingest(raw_text, splitter=None, metadata=None):
    """
    Returns a list of L{Document} objects for the cases in I{raw_text}.
    Cases whose text doesn't yield an opinion body, and repeats of
    earlier cases, are skipped with a warning.
    """
    docs = []
    for block in split_cases(raw_text, splitter):
        try:
            docs.append(extract_metadata(block, metadata))
        except MissingOpinionBody as e:
            log.warning("Skipping case block: %s", e)
    return unique(docs)

def unique(docs):
    """
    Returns a list of the L{Document} objects in I{docs} without any
    whose ID repeats an earlier one's. IDs are content hashes, so a
    repeat is the same case ingested twice.
    """
    result, seen = [], set()
    for doc in docs:
        if doc.id in seen:
            log.warning(
                "Skipping duplicate of case '%s' (%s)", doc.case_title, doc.id)
            continue
        seen.add(doc.id)
        result.append(doc)
    return result
