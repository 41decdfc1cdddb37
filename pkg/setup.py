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



NAME = "dicta"


### Imports and support
from setuptools import setup

### Define requirements
required = [
    'numpy', 'matplotlib', 'httpx', 'pydantic>=2', 'PyYAML', 'networkx',
    'twisted']


### Define setup options
kw = {'version':'0.9.0',
      'license':'Apache License (2.0)',
      'platforms':'OS Independent',

      'author':"The dicta authors",
      
      'install_requires':required,
      'python_requires':'>=3.9',
      'packages':['dicta', 'dicta.scripts', 'dicta.test'],
      'package_data': {
          'dicta': ['prompts/*.txt'],
          'dicta.test': ['data/*'],
      },
      'entry_points': {
          'console_scripts': [
              'dicta = dicta.scripts.main:entry',
          ],
      },
      'zip_safe':False,
      'long_description_content_type': "text/markdown",
}

kw['keywords'] = [
    'legal', 'nlp', 'llm', 'discourse', 'rst', 'copyright',
    'information extraction', 'prompt optimization',
]


kw['classifiers'] = [
    'Development Status :: 4 - Beta',

    'Intended Audience :: Science/Research',
    'Intended Audience :: Legal Industry',
    
    'License :: OSI Approved :: Apache Software License',
    'Operating System :: OS Independent',
    'Programming Language :: Python :: 3',
    
    'Topic :: Scientific/Engineering :: Artificial Intelligence',
    'Topic :: Text Processing :: Linguistic',
]


# You get 77 characters. Use them wisely.
#----------------------------------------------------------------------------
#        10        20        30        40        50        60        70
#2345678901234567890123456789012345678901234567890123456789012345678901234567
kw['description'] = " ".join("""
Discourse trees and agentic LLM extraction of damages features from opinions.
""".split("\n"))

kw['long_description'] = """
The dicta package reads judicial opinions in copyright-damage cases
and decides, for each one, whether the damages awarded have a
punitive component. It compares five ways of doing that: a random
baseline, a plain LLM prompt, chain-of-thought, an agent that plans
and reflects, and the same agent given the opinion's rhetorical
structure (RST) tree.

Every model call goes through one gateway that can record exchanges
to a fixture file and replay them later, so a whole pipeline run can
be repeated exactly without network access.

"""

### Finally, run the setup
setup(name=NAME, **kw)
