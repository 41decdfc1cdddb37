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
Rhetorical Structure Theory (RST) trees over the elementary discourse
units (EDUs) of an opinion.

Trees come from an external parser in a JSON format owned here (see
L{parse_tree}), or from L{fallback_tree} when there is no parser
output. Once parsed, a tree is treated as immutable. From a tree you
can get the path from any EDU up to the root (L{path_to_root}), render
that path as text (L{render_path}) and have the model explain it in
plain words (L{verbalize}), and cut out the minimal subtree covering a
set of EDUs (L{extract_subtree}) to serve as evidence for a verdict.
"""

import re, json, logging
from typing import NamedTuple

from dicta.errors import FormatError, StructureError, UnknownEdu, \
    DiscourseError
from dicta import util, templates
from dicta.util import sub


log = logging.getLogger(__name__)

NUCLEARITIES = ('nucleus', 'satellite')

#: The classic set of 23 relations.
CLASSIC_RELATIONS = (
    "antithesis", "background", "circumstance", "concession", "condition",
    "contrast", "elaboration", "enablement", "evaluation", "evidence",
    "interpretation", "justify", "motivation", "non-volitional cause",
    "non-volitional result", "otherwise", "purpose", "restatement",
    "sequence", "solutionhood", "summary", "volitional cause",
    "volitional result",
)
#: Relation classes and pseudo-relations that parsers trained on
#: RST-DT-style corpora emit.
PARSER_RELATIONS = (
    "attribution", "cause", "comparison", "explanation", "joint", "list",
    "manner-means", "topic-comment", "temporal", "topic-change",
    "same-unit", "textual-organization", "span", "preparation", "result",
    "reason", "means", "example", "definition", "consequence",
    "disjunction", "unconditional", "unless", "conclusion", "comment",
    "problem-solution", "question-answer", "statement-response",
    "circumstance", "analogy", "preference", "proportion", "hypothetical",
    "contingency", "topic-shift", "topic-drift",
)
RELATIONS = frozenset(CLASSIC_RELATIONS + PARSER_RELATIONS)

FALLBACK_RELATION = "elaboration"


def relationKey(relation):
    return re.sub(r'[\s_]+', "-", relation.strip().lower()).replace(
        "non-volitional-", "non-volitional ").replace(
            "volitional-", "volitional ")

def isKnownRelation(relation):
    key = relationKey(relation)
    return key in RELATIONS or key.replace("-", " ") in RELATIONS


class Edu(object):
    """
    An elementary discourse unit: the I{text} of leaf I{id}, numbered
    from 1 in document order.
    """
    __slots__ = ['id', 'text']

    def __init__(self, id, text):
        self.id = id
        self.text = text

    def __eq__(self, other):
        return isinstance(other, Edu) and \
            (self.id, self.text) == (other.id, other.text)

    def __hash__(self):
        return hash((self.id, self.text))
    
    def __repr__(self):
        return sub("Edu({:d}, {!r})", self.id, self.text)


class RstNode(object):
    """
    I am one node of an RST tree, covering EDUs I{span[0]} through
    I{span[1]} inclusive.

    @ivar nuclearity: 'nucleus' or 'satellite', or C{None} for a root.
    @ivar relation: The relation that links me to my parent.
    @ivar children: A list of child nodes, empty for a leaf.
    """
    __slots__ = ['span', 'nuclearity', 'relation', 'children']

    def __init__(self, span, nuclearity=None, relation=None, children=None):
        self.span = tuple(span)
        self.nuclearity = nuclearity
        self.relation = relation
        self.children = list(children) if children else []

    def __eq__(self, other):
        if not isinstance(other, RstNode): return False
        return self.key() == other.key() and self.children == other.children

    def __repr__(self):
        return sub(
            "RstNode([{:d},{:d}], {}, {}, {:d} children)",
            self.span[0], self.span[1], self.nuclearity, self.relation,
            len(self.children))
    
    def key(self):
        return self.span, self.nuclearity, self.relation
    
    @property
    def isLeaf(self):
        return not self.children

    def contains(self, lo, hi=None):
        if hi is None: hi = lo
        return self.span[0] <= lo and hi <= self.span[1]

    def walk(self, path="root"):
        """
        Yields (path, node) for me and every node below me in
        pre-order.
        """
        stack = [(path, self)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for k in range(len(node.children)-1, -1, -1):
                stack.append((
                    sub("{}.children[{:d}]", path, k), node.children[k]))

    def count(self):
        return sum(1 for x in self.walk())

    def leafIDs(self):
        return [x.span[0] for p, x in self.walk() if x.isLeaf]
    
    def toDict(self, isRoot=False):
        result = {'span': list(self.span)}
        if not isRoot and self.nuclearity is not None:
            result['nuclearity'] = self.nuclearity
        if self.relation is not None:
            result['relation'] = self.relation
        if self.children:
            result['children'] = [x.toDict() for x in self.children]
        return result


class RstTree(object):
    """
    I am the RST tree of one document: a I{root} node over a list of
    I{edus}.
    """
    def __init__(self, doc_id, root, edus):
        self.doc_id = doc_id
        self.root = root
        self.edus = list(edus)

    def __eq__(self, other):
        if not isinstance(other, RstTree): return False
        return (self.doc_id, self.edus, self.root) == \
            (other.doc_id, other.edus, other.root)
        
    def __len__(self):
        return len(self.edus)

    def __repr__(self):
        return sub("RstTree({}, {:d} EDUs)", self.doc_id, len(self.edus))
    
    def edu(self, eduID):
        if not isinstance(eduID, int) or not 1 <= eduID <= len(self.edus):
            raise UnknownEdu(sub(
                "No EDU {} in the {:d}-EDU tree of '{}'",
                eduID, len(self.edus), self.doc_id))
        return self.edus[eduID-1]

    def text(self, span):
        """
        Returns the text of the EDUs in I{span}, joined by spaces.
        """
        return " ".join([x.text for x in self.edus[span[0]-1:span[1]]])

    def nodeForSpan(self, span):
        """
        Returns my node with the given I{span}, or C{None}.
        """
        span = tuple(span)
        node = self.root
        while node.span != span:
            for child in node.children:
                if child.contains(*span):
                    node = child
                    break
            else: return
        return node

    def depth(self, eduID):
        """
        Returns the number of edges between the root and the leaf of
        EDU I{eduID}, found by a plain search of all root-to-leaf paths.
        """
        self.edu(eduID)
        for path, node in self.root.walk():
            if node.isLeaf and node.span[0] == eduID:
                return path.count(".")


#--- Parsing and validation ---------------------------------------------------

def validate(tree):
    """
    Checks all structural invariants of I{tree}, raising
    L{StructureError} for the first violation found in pre-order, and
    warning about relations not in the known vocabulary. Returns
    I{tree}.
    """
    N = len(tree.edus)
    if tree.root.span != (1, N):
        raise StructureError('bad_span', "root", sub(
            "root span {} is not [1, {:d}]", list(tree.root.span), N))
    unknown = set()
    for path, node in tree.root.walk():
        lo, hi = node.span
        if not 1 <= lo <= hi <= N:
            raise StructureError('bad_span', path, sub(
                "span {} outside [1, {:d}]", list(node.span), N))
        if node.isLeaf:
            if lo != hi:
                raise StructureError(
                    'bad_span', path, "leaf covers more than one EDU")
            continue
        if lo == hi or len(node.children) < 2:
            raise StructureError('bad_span', path, sub(
                "internal node over {} needs two or more children",
                list(node.span)))
        k = lo
        for j, child in enumerate(node.children):
            childPath = sub("{}.children[{:d}]", path, j)
            cLo, cHi = child.span
            if cLo > k:
                raise StructureError('gap', childPath, sub(
                    "EDUs {:d}-{:d} not covered", k, cLo-1))
            if cLo < k:
                kind = 'overlap' if j else 'bad_span'
                raise StructureError(kind, childPath, sub(
                    "span {} starts before EDU {:d}", list(child.span), k))
            if cHi > hi:
                raise StructureError('bad_span', childPath, sub(
                    "span {} extends past parent {}",
                    list(child.span), list(node.span)))
            k = cHi + 1
        if k <= hi:
            raise StructureError('gap', path, sub(
                "EDUs {:d}-{:d} not covered by children", k, hi))
        if not any(x.nuclearity == 'nucleus' for x in node.children):
            raise StructureError('no_nucleus', path)
        for child in node.children:
            if child.relation and not isKnownRelation(child.relation):
                unknown.add(child.relation)
    for relation in sorted(unknown):
        log.warning(
            "Unknown RST relation '%s' in tree of %s", relation, tree.doc_id)
    return tree

def _node(data, path, isRoot=False):
    if not isinstance(data, dict):
        raise FormatError(sub("Node at {} is not an object", path))
    span = data.get('span')
    if not isinstance(span, list) or len(span) != 2 or \
       not all(isinstance(x, int) and not isinstance(x, bool) for x in span):
        raise FormatError(sub("Node at {} needs a [lo, hi] span", path))
    if span[0] > span[1]:
        raise StructureError(
            'bad_span', path, sub("span {} is reversed", span))
    nuclearity = relation = None
    if not isRoot:
        nuclearity = data.get('nuclearity')
        if nuclearity not in NUCLEARITIES:
            raise FormatError(sub(
                "Node at {} has nuclearity {!r}, not one of {}",
                path, nuclearity, "/".join(NUCLEARITIES)))
        relation = data.get('relation')
        if not isinstance(relation, str) or not relation.strip():
            raise FormatError(sub("Node at {} has no relation", path))
    else:
        relation = data.get('relation')
    children = data.get('children') or []
    if not isinstance(children, list):
        raise FormatError(sub("Children at {} are not a list", path))
    return RstNode(span, nuclearity, relation, [
        _node(x, sub("{}.children[{:d}]", path, k))
        for k, x in enumerate(children)])

def parse_tree(serialized, format="pipeline_json"):
    """
    Returns an L{RstTree} parsed from the JSON text I{serialized}::

        {"doc_id": ..., "edus": [{"id": 1, "text": ...}, ...],
         "root": {"span": [lo, hi], "nuclearity": ..., "relation": ...,
                  "children": [...]}}

    Leaves omit I{children} and the root omits I{nuclearity}. Every
    structural invariant is checked, and a violation is an error,
    never repaired.

    @raise FormatError: If the text isn't JSON of that shape.
    @raise StructureError: If the tree breaks an invariant, naming
        the kind of problem and the path to the node.
    """
    if format != "pipeline_json":
        raise ValueError(sub("Unsupported tree format '{}'", format))
    try:
        data = json.loads(serialized)
    except ValueError as e:
        raise FormatError(sub("Tree is not valid JSON: {}", e),
                          line=getattr(e, 'lineno', None))
    if not isinstance(data, dict) or not isinstance(data.get('edus'), list) \
       or 'root' not in data:
        raise FormatError("Tree JSON needs 'edus' and 'root'")
    edus = []
    for k, item in enumerate(data['edus']):
        if not isinstance(item, dict) or item.get('id') != k+1:
            raise FormatError(sub("EDU #{:d} should have id {:d}", k+1, k+1))
        text = item.get('text')
        if not isinstance(text, str) or not text.strip():
            raise FormatError(sub("EDU {:d} has no text", k+1))
        edus.append(Edu(k+1, text))
    if not edus:
        raise FormatError("Tree has no EDUs")
    root = _node(data['root'], "root", isRoot=True)
    return validate(RstTree(str(data.get('doc_id', "")), root, edus))

def serialize_tree(tree):
    """
    Returns the JSON text for I{tree} that L{parse_tree} reads, on one
    line.
    """
    return json.dumps({
        'doc_id': tree.doc_id,
        'edus': [{'id': x.id, 'text': x.text} for x in tree.edus],
        'root': tree.root.toDict(isRoot=True),
    }, ensure_ascii=False)


#--- Paths --------------------------------------------------------------------

class PathStep(NamedTuple):
    child_span: tuple
    relation: str
    nuclearity: str
    parent_span: tuple


class LinearizedPath(NamedTuple):
    """
    The path from the leaf of EDU I{target_edu} up to the root, as a
    list of L{PathStep} objects, leaf first.
    """
    target_edu: int
    steps: list

    
def path_to_root(tree, edu_id):
    """
    Returns the L{LinearizedPath} from the leaf of EDU I{edu_id} of
    I{tree} up to its root. There is one step per edge, so a tree that
    is a single leaf gives a path with no steps.

    @raise UnknownEdu: If I{edu_id} isn't an EDU of I{tree}.
    """
    tree.edu(edu_id)
    steps = []
    node = tree.root
    while not node.isLeaf:
        for child in node.children:
            if child.contains(edu_id):
                steps.append(PathStep(
                    child.span, child.relation, child.nuclearity, node.span))
                node = child
                break
    steps.reverse()
    return LinearizedPath(edu_id, steps)

def summarize(text, head=12, tail=6):
    """
    Returns I{text} if it is short, or its first I{head} and last
    I{tail} words around an ellipsis.
    """
    words = text.split()
    if len(words) <= head + tail + 6:
        return " ".join(words)
    return " ".join(words[:head] + ["..."] + words[-tail:])

def spanText(tree, span):
    if span[0] == span[1]:
        return util.normalize(tree.text(span))
    return summarize(tree.text(span))

def render_path(path, tree):
    """
    Returns a text rendering of I{path}, one line per step from the
    target EDU upward::

        "<child text>" --<relation> (<nuclearity>)--> "<parent summary>"

    Multi-EDU spans are shown abbreviated. A path with no steps
    renders as the quoted target text alone.
    """
    if not path.steps:
        return sub('"{}"', spanText(tree, (path.target_edu, path.target_edu)))
    lines = []
    for step in path.steps:
        lines.append(sub(
            '"{}" --{} ({})--> "{}"',
            spanText(tree, step.child_span), step.relation,
            step.nuclearity, summarize(tree.text(step.parent_span))))
    return "\n".join(lines)

def verbalize(
        path, tree, target_text, gateway,
        prompts=templates.default, maxWords=150):
    """
    Returns the model's plain-language explanation of how the target
    span of I{path} contributes to the opinion's structure.

    An explanation over I{maxWords} words gets one request to shorten
    it. If it is still too long it is truncated, with a warning.
    """
    request = gateway.request(prompts.render('verbalize', {
        'Tree-Of-Discourse': render_path(path, tree),
        'Target Text Span': target_text}))
    text = gateway.complete(request).text.strip()
    N = len(text.split())
    if N > maxWords:
        log.info("Explanation of %d words, asking for a shorter one", N)
        request = request.withRepair(text, sub(
            "Your explanation has {:d} words. Rewrite it in no more than "
            "{:d} words.", N, maxWords))
        text = gateway.complete(request).text.strip()
        N = len(text.split())
        if N > maxWords:
            log.warning(
                "Truncating %d-word explanation of EDU %d in %s to %d words",
                N, path.target_edu, tree.doc_id, maxWords)
            text = " ".join(text.split()[:maxWords])
    return text


#--- Subtrees -----------------------------------------------------------------

class RstSubtree(object):
    """
    A connected piece of an L{RstTree}: copies of its nodes, each with
    the source node's span, nuclearity and relation and a subsequence
    of its children.

    @ivar covered_edus: A frozenset of the EDU IDs at my leaves.
    """
    def __init__(self, root, covered_edus):
        self.root = root
        self.covered_edus = frozenset(covered_edus)

    def __eq__(self, other):
        return isinstance(other, RstSubtree) and \
            (self.root, self.covered_edus) == (other.root, other.covered_edus)

    def __repr__(self):
        return sub(
            "RstSubtree({}, EDUs {})", list(self.root.span),
            sorted(self.covered_edus))
    
    def toDict(self):
        return {
            'root': self.root.toDict(),
            'covered_edus': sorted(self.covered_edus)}

    @classmethod
    def fromDict(cls, data):
        root = _node(data['root'], "root", isRoot=True)
        root.nuclearity = data['root'].get('nuclearity')
        return cls(root, data['covered_edus'])


def lowestCommonAncestor(tree, lo, hi):
    """
    Returns the lowest node of I{tree} whose span contains EDUs I{lo}
    through I{hi}.
    """
    node = tree.root
    while True:
        for child in node.children:
            if child.contains(lo, hi):
                node = child
                break
        else: return node

def _prune(node, wanted):
    children = [
        _prune(x, wanted) for x in node.children
        if any(x.contains(k) for k in wanted)]
    return RstNode(node.span, node.nuclearity, node.relation, children)

def extract_subtree(tree, edu_ids):
    """
    Returns the minimal L{RstSubtree} of I{tree} that contains the
    leaves of all EDUs in I{edu_ids}: rooted at their lowest common
    ancestor and keeping only the nodes on paths from it down to those
    leaves.

    @raise UnknownEdu: If any of I{edu_ids} isn't an EDU of I{tree}.
    """
    wanted = sorted(set(edu_ids))
    if not wanted:
        raise ValueError("Need at least one EDU for a subtree")
    for eduID in wanted:
        tree.edu(eduID)
    lca = lowestCommonAncestor(tree, wanted[0], wanted[-1])
    return RstSubtree(_prune(lca, wanted), wanted)

def validate_subtree(subtree, tree):
    """
    Checks that I{subtree} is a valid piece of I{tree}, raising
    L{StructureError} or L{UnknownEdu} if not. Returns I{subtree}.
    """
    for eduID in subtree.covered_edus:
        tree.edu(eduID)
    leaves = set()
    for path, node in subtree.root.walk():
        source = tree.nodeForSpan(node.span)
        if source is None:
            raise StructureError('bad_span', path, sub(
                "no node over {} in the source tree", list(node.span)))
        if source.key() != node.key():
            raise StructureError('bad_span', path, sub(
                "node over {} differs from its source",
                list(node.span)))
        sourceSpans = [x.span for x in source.children]
        k = 0
        for child in node.children:
            while k < len(sourceSpans) and sourceSpans[k] != child.span:
                k += 1
            if k == len(sourceSpans):
                raise StructureError('bad_span', path, sub(
                    "children of {} are not a subsequence of the source's",
                    list(node.span)))
            k += 1
        if node.isLeaf:
            if not source.isLeaf:
                raise StructureError('bad_span', path, sub(
                    "subtree leaf over {} is not a source leaf",
                    list(node.span)))
            leaves.add(node.span[0])
    if leaves != set(subtree.covered_edus):
        raise DiscourseError(sub(
            "Subtree covers EDUs {} but claims {}",
            sorted(leaves), sorted(subtree.covered_edus)))
    return subtree


#--- Fallback trees and persistence -------------------------------------------

def fallback_tree(edus, doc_id=""):
    """
    Returns a right-branching L{RstTree} over the list of L{Edu}
    objects I{edus}: each internal node has the next EDU as its
    nucleus and the rest of the span as an elaboration satellite.
    There are exactly M{n-1} internal nodes for M{n} EDUs.
    """
    edus = list(edus)
    N = len(edus)
    if not N:
        raise ValueError("A tree needs at least one EDU")
    if N == 1:
        return validate(RstTree(doc_id, RstNode((1, 1)), edus))

    def leaf(k, nuclearity):
        return RstNode((k, k), nuclearity, FALLBACK_RELATION)

    node = leaf(N, 'satellite')
    for k in range(N-1, 1, -1):
        node = RstNode(
            (k, N), 'satellite', FALLBACK_RELATION, [leaf(k, 'nucleus'), node])
    root = RstNode((1, N), children=[leaf(1, 'nucleus'), node])
    return validate(RstTree(doc_id, root, edus))

reSentence = re.compile(
    r'(?<=[.!?])(?P<close>["”’)\]]*)\s+(?=["“(\[]?[A-Z0-9§])')
ABBREVIATIONS = (
    "v.", "vs.", "Corp.", "Inc.", "Co.", "Ltd.", "No.", "Nos.", "U.S.",
    "U.S.C.", "S.", "F.", "Supp.", "Cir.", "Mr.", "Ms.", "Dr.", "Id.",
    "id.", "e.g.", "i.e.", "Cf.", "cf.", "Civ.", "P.", "R.", "Stat.",
    "Dist.", "App'x", "Ct.", "Ed.", "Fed.", "Jan.", "Feb.", "Mar.", "Apr.",
    "Aug.", "Sept.", "Sep.", "Oct.", "Nov.", "Dec.", "L.", "St.",
)

def sentence_edus(text):
    """
    Returns a list of L{Edu} objects, one per sentence of I{text},
    using a naive split that knows a few legal abbreviations.
    """
    pieces = []
    k0 = 0
    for m in reSentence.finditer(text):
        piece = text[k0:m.end('close')]
        words = piece.split()
        if words:
            lastWord = words[-1]
            if lastWord in ABBREVIATIONS or re.fullmatch(r'[A-Z]\.', lastWord):
                continue
        pieces.append(piece)
        k0 = m.end()
    pieces.append(text[k0:])
    pieces = [util.normalize(x) for x in pieces]
    return [Edu(k+1, x) for k, x in enumerate([x for x in pieces if x])]

def save_trees(trees, filePath):
    util.writeJSONL(filePath, [serialize_tree(x) for x in trees])

def load_trees(filePath):
    """
    Returns a dict of L{RstTree} objects, keyed by document ID, from
    the JSONL file at I{filePath}.
    """
    return {x.doc_id: x for x in util.readJSONL(filePath, parse_tree)}
