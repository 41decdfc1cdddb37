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
Prompt templates with C{{{Placeholder Name}}} substitution.

The templates ship as text files in the C{prompts} directory of this
package. A different directory can be configured, in which case any
template not found there still comes from the bundled ones.
"""

import os, re

from dicta.errors import ConfigError
from dicta.util import sub


BUNDLED = os.path.join(os.path.dirname(__file__), "prompts")

rePlaceholder = re.compile(r'\{\{([^{}]+)\}\}')


def placeholders(text):
    """
    Returns a list of the placeholder names in I{text}, in order of
    first appearance.
    """
    result = []
    for name in rePlaceholder.findall(text):
        if name not in result:
            result.append(name)
    return result

def render(text, values, strict=True):
    """
    Returns I{text} with each C{{{Name}}} replaced by C{values[Name]}.

    Substitution is a single pass, so placeholder-like text inside a
    substituted value is left alone. With I{strict} set, a placeholder
    with no value raises L{ConfigError}; otherwise it is left in place.
    """
    def replacement(match):
        name = match.group(1)
        if name in values:
            return str(values[name])
        if strict:
            raise ConfigError(sub("No value for placeholder '{}'", name))
        return match.group(0)
    return rePlaceholder.sub(replacement, text)


class Templates(object):
    """
    I load and render the prompt templates by name, e.g., C{'label'}
    for C{label.txt}.
    """
    def __init__(self, dirPath=None):
        self.dirs = [BUNDLED]
        if dirPath and os.path.abspath(dirPath) != os.path.abspath(BUNDLED):
            self.dirs.insert(0, dirPath)
        self.texts = {}

    def __getitem__(self, name):
        if name not in self.texts:
            for dirPath in self.dirs:
                filePath = os.path.join(dirPath, name + ".txt")
                if os.path.isfile(filePath):
                    with open(filePath, encoding='utf-8') as fh:
                        self.texts[name] = fh.read().rstrip("\n")
                    break
            else: raise ConfigError(sub("No prompt template '{}'", name))
        return self.texts[name]

    def render(self, name, values=None, strict=True):
        return render(self[name], values or {}, strict)


default = Templates()
