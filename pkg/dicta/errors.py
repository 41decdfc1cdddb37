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
Everything that can go wrong, grouped by the module that raises it.

Each exception carries its diagnostic payload as attributes so the
command line can report it on one line.
"""


class DictaError(Exception):
    """
    I am the base class of every error raised on purpose by
    L{dicta}.
    """


class ConfigError(DictaError):
    """
    A configuration value or a path it names is invalid.
    """


#--- Gateway ------------------------------------------------------------------

class GatewayError(DictaError):
    pass

class NetworkError(GatewayError):
    """
    The chat-completions endpoint could not be reached, or kept
    failing after bounded retries.

    @ivar status: The last HTTP status code received, or C{None} if
        the transport itself failed.
    """
    def __init__(self, message, status=None):
        GatewayError.__init__(self, message)
        self.status = status

class AuthError(GatewayError):
    """
    The credential is missing or was refused.
    """

class FixtureMiss(GatewayError):
    """
    Replay mode was asked for a request that the fixture file does not
    contain.

    @ivar key: The content hash of the missing request.
    """
    def __init__(self, key):
        GatewayError.__init__(
            self, "No fixture recorded for request {}".format(key))
        self.key = key

class SchemaViolation(GatewayError):
    """
    The model never produced output matching the expected JSON schema.

    @ivar outputs: A list of every raw output received, in order.
    """
    def __init__(self, message, outputs):
        GatewayError.__init__(self, message)
        self.outputs = list(outputs)


#--- Corpus -------------------------------------------------------------------

class CorpusError(DictaError):
    pass

class NoCasesFound(CorpusError):
    pass

class MissingOpinionBody(CorpusError):
    pass

class DanglingSource(CorpusError):
    """
    A citation names a source document that is not in the corpus.
    """

class FormatError(DictaError):
    """
    A persisted artifact (corpus, tree, results) could not be read.

    @ivar line: The 1-based line number where the problem was found,
        if known.
    """
    def __init__(self, message, line=None):
        DictaError.__init__(self, message)
        self.line = line


#--- Sectioning ---------------------------------------------------------------

class SectioningError(DictaError):
    pass

class ReassemblyMismatch(SectioningError):
    """
    The sections returned by the model do not reassemble into the
    opinion text.

    @ivar offset: Index into the whitespace-normalized opinion text of
        the first character that differs.
    """
    def __init__(self, message, offset):
        SectioningError.__init__(self, message)
        self.offset = offset

class InvalidLabel(SectioningError):
    pass


#--- Discourse ----------------------------------------------------------------

class DiscourseError(DictaError):
    pass

class StructureError(DiscourseError):
    """
    An RST tree violates a structural invariant.

    @ivar kind: One of 'gap', 'overlap', 'no_nucleus', 'bad_span'.
    @ivar path: Where the offending node sits, e.g.
        C{root.children[1].children[0]}.
    """
    kinds = ('gap', 'overlap', 'no_nucleus', 'bad_span')
    
    def __init__(self, kind, path, detail=""):
        if kind not in self.kinds:
            raise ValueError("Unknown structure error kind '{}'".format(kind))
        message = "{} at {}".format(kind, path)
        if detail: message += ": " + detail
        DiscourseError.__init__(self, message)
        self.kind = kind
        self.path = path

class UnknownEdu(DiscourseError):
    pass


#--- Extraction ---------------------------------------------------------------

class ExtractionError(DictaError):
    pass

class VerdictNotFound(ExtractionError):
    pass

class PlanEmpty(ExtractionError):
    pass

class EvidenceUnresolved(ExtractionError):
    pass


#--- Evaluation ---------------------------------------------------------------

class EvaluationError(DictaError):
    pass

class IdMismatch(EvaluationError):
    """
    Predictions and gold labels do not cover the same documents.

    @ivar missing: Document IDs with a gold label but no prediction.
    @ivar extra: Document IDs with a prediction but no gold label.
    """
    def __init__(self, missing, extra):
        EvaluationError.__init__(self, "Prediction/gold ID mismatch: {:d} "
            "missing, {:d} extra".format(len(missing), len(extra)))
        self.missing = sorted(missing)
        self.extra = sorted(extra)

class EmptyEvaluation(EvaluationError):
    pass

class UnresolvedLabel(EvaluationError):
    """
    A prediction of "not addressed" was found under the C{as_error}
    policy.
    """
