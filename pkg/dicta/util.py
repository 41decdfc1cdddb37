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
Utility stuff.
"""

import os, re, json, hashlib, tempfile
from concurrent.futures import ThreadPoolExecutor

from dicta.errors import FormatError


QUOTES = {
    u"‘": "'", u"’": "'", u"‚": "'", u"‛": "'",
    u"′": "'",
    u"“": '"', u"”": '"', u"„": '"', u"‟": '"',
    u"″": '"',
}
reQuote = re.compile("|".join(QUOTES))
reSpace = re.compile(r'\s+')


def sub(proto, *args):
    """
    This really should be a built-in function.
    """
    return proto.format(*args)

def normalize(text):
    """
    Returns I{text} with Unicode quotes straightened and every run of
    whitespace collapsed to a single space, stripped at both ends.

    This is the equality used everywhere a model may have reflowed
    text it was told not to change.
    """
    text = reQuote.sub(lambda m: QUOTES[m.group(0)], text)
    return reSpace.sub(" ", text).strip()

def firstDivergence(a, b):
    """
    Returns the index of the first character where strings I{a} and
    I{b} differ, or C{None} if they are equal.
    """
    if a == b: return
    N = min(len(a), len(b))
    for k in range(N):
        if a[k] != b[k]:
            return k
    return N

def canonicalJSON(obj):
    """
    Returns a canonical JSON serialization of I{obj}: sorted keys, no
    insignificant whitespace, non-ASCII kept as is.
    """
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)

def contentHash(obj):
    """
    Returns the hex SHA-256 digest of the canonical JSON form of
    I{obj}.
    """
    return hashlib.sha256(canonicalJSON(obj).encode('utf-8')).hexdigest()

def words(text):
    return text.split()

def atomicWrite(filePath, text):
    """
    Writes I{text} to I{filePath} by way of a temporary file in the
    same directory that is then renamed over the target, so a reader
    never sees a partial file.
    """
    dirPath = os.path.dirname(os.path.abspath(filePath))
    if not os.path.isdir(dirPath):
        os.makedirs(dirPath)
    fd, tempPath = tempfile.mkstemp(dir=dirPath, suffix=".tmp")
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as fh:
            fh.write(text)
        os.replace(tempPath, filePath)
    except:
        if os.path.exists(tempPath):
            os.remove(tempPath)
        raise

def writeJSON(filePath, obj):
    atomicWrite(filePath, json.dumps(
        obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n")

def readJSON(filePath):
    with open(filePath, encoding='utf-8') as fh:
        try:
            return json.load(fh)
        except ValueError as e:
            raise FormatError(sub("{}: {}", filePath, e), line=e.lineno)

def writeJSONL(filePath, lines):
    """
    Atomically writes the already-serialized JSON strings in I{lines},
    one per line, to I{filePath}.
    """
    text = "".join([line + "\n" for line in lines])
    atomicWrite(filePath, text)

def readJSONL(filePath, loader=json.loads):
    """
    Yields the result of calling I{loader} on each non-blank line of
    the JSONL file at I{filePath}.

    Any exception raised by I{loader} becomes a L{FormatError} with
    the 1-based line number of the offending line.
    """
    with open(filePath, encoding='utf-8') as fh:
        for k, line in enumerate(fh):
            if not line.strip(): continue
            try:
                yield loader(line)
            except Exception as e:
                raise FormatError(
                    sub("{}, line {:d}: {}", filePath, k+1, e), line=k+1)

def parallelMap(func, items, N=1):
    """
    Returns a list of C{func(item)} for each of I{items}, in the same
    order as I{items}, computed with up to I{N} worker threads.
    """
    items = list(items)
    if N <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=N) as executor:
        return list(executor.map(func, items))

def normalizeMap(text):
    """
    Returns a 2-tuple with the L{normalize}d version of I{text} and a
    list giving, for each of its characters, the index in I{text} of
    the character it came from. A collapsed run of whitespace maps to
    the start of the run.
    """
    chars, positions = [], []
    kSpace = None
    for k, c in enumerate(text):
        if c.isspace():
            if kSpace is None: kSpace = k
            continue
        if kSpace is not None and chars:
            chars.append(" ")
            positions.append(kSpace)
        kSpace = None
        chars.append(QUOTES.get(c, c))
        positions.append(k)
    return "".join(chars), positions

def paragraphChunks(text, maxChars):
    """
    Returns a list of consecutive pieces of I{text}, each no longer
    than I{maxChars} unless one paragraph alone is, cut only at blank
    lines. Joining the pieces gives back I{text}.
    """
    if len(text) <= maxChars: return [text]
    paragraphs = re.split(r'(?<=\n)(?=\s*\n)', text)
    chunks = [""]
    for paragraph in paragraphs:
        if chunks[-1] and len(chunks[-1]) + len(paragraph) > maxChars:
            chunks.append("")
        chunks[-1] += paragraph
    return chunks
