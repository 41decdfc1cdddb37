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
Discourse trees and agentic LLM extraction for judicial opinions.

The pipeline stages, in order, are in L{corpus} (splitting raw case
files and citation graphs), L{sectioning} (functional sections of an
opinion), L{discourse} (RST trees and their linearization),
L{extraction} (the five extraction methods), L{optimizer} (plan prompt
refinement) and L{evaluation}. Every model call goes through a
L{gateway.Gateway}.
"""

__version__ = "0.9.0"
