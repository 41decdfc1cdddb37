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
Uniform chat-completion access for everything else in L{dicta}.

A L{Gateway} answers L{CompletionRequest} objects from an in-session
cache, from a fixture file of recorded exchanges, or from a live
L{ChatEndpoint}, depending on its L{GatewayMode}. With a fixture file
and replay mode, nothing in the pipeline touches the network.
"""

import os, re, json, time, logging, threading
from typing import Literal, Optional

import httpx
from pydantic import BaseModel, Field, ValidationError, field_validator, \
    model_validator

from dicta.errors import AuthError, NetworkError, FixtureMiss, \
    SchemaViolation
from dicta.util import sub, canonicalJSON, contentHash, readJSONL


log = logging.getLogger(__name__)

DEFAULT_MODEL = "gpt-4o-mini"
REPAIR_INSTRUCTION = (
    "Your previous reply was not a valid JSON object in the required "
    "format. Output only the JSON object and nothing else.")

reFence = re.compile(r'^```[A-Za-z]*\s*\n?(.*?)\n?\s*```$', re.DOTALL)


class ChatMessage(BaseModel):
    role: Literal['system', 'user', 'assistant']
    content: str = Field(min_length=1)


class CompletionRequest(BaseModel):
    """
    One chat-completion request. The defaults are those of the
    pipeline: C{gpt-4o-mini} at temperature zero.
    """
    model: str = Field(default=DEFAULT_MODEL, min_length=1)
    temperature: float = Field(default=0.0, ge=0.0)
    messages: list[ChatMessage]
    max_output_tokens: Optional[int] = Field(default=None, gt=0)

    @field_validator('messages')
    @classmethod
    def userFirst(cls, messages):
        if not messages:
            raise ValueError("A request needs at least one message")
        for message in messages:
            if message.role == 'system': continue
            if message.role != 'user':
                raise ValueError(
                    "The first non-system message must be from the user")
            break
        return messages

    def key(self):
        """
        Returns the content hash identifying me in caches and fixture
        files. Only the model, temperature, messages and output limit
        go into it.
        """
        return contentHash({
            'model': self.model,
            'temperature': self.temperature,
            'messages': [
                {'role': x.role, 'content': x.content}
                for x in self.messages],
            'max_output_tokens': self.max_output_tokens,
        })

    def payload(self):
        """
        Returns the JSON body for a C{POST /v1/chat/completions} call.
        """
        result = {
            'model': self.model,
            'temperature': self.temperature,
            'messages': [
                {'role': x.role, 'content': x.content}
                for x in self.messages],
        }
        if self.max_output_tokens:
            result['max_tokens'] = self.max_output_tokens
        return result
    
    def withMessage(self, role, content):
        messages = list(self.messages)
        messages.append(ChatMessage(role=role, content=content))
        return self.model_copy(update={'messages': messages})
    
    def withRepair(self, previous, instruction):
        """
        Returns a copy of me extended by the assistant's I{previous}
        output (unless it was empty) and a user message with the
        repair I{instruction}.
        """
        request = self
        if previous and previous.strip():
            request = request.withMessage('assistant', previous)
        return request.withMessage('user', instruction)


class CompletionResponse(BaseModel):
    text: str
    token_usage: dict[str, int] = Field(default_factory=dict)
    cache_hit: bool = False

    @field_validator('token_usage')
    @classmethod
    def nonNegative(cls, usage):
        for name, value in usage.items():
            if value < 0:
                raise ValueError(sub("Token counter '{}' is negative", name))
        return usage


class GatewayMode(BaseModel):
    mode: Literal['live', 'record', 'replay'] = 'live'
    fixture_path: Optional[str] = None

    @model_validator(mode='after')
    def needsFixtures(self):
        if self.mode != 'live' and not self.fixture_path:
            raise ValueError(sub("Mode '{}' needs a fixture path", self.mode))
        return self


def stripFences(text):
    """
    Returns I{text} stripped of surrounding whitespace and of a
    Markdown code fence wrapped around all of it, if any.
    """
    text = text.strip()
    match = reFence.match(text)
    return match.group(1).strip() if match else text


class ChatEndpoint(object):
    """
    I talk to an HTTP chat-completions endpoint using the widely used
    C{POST /v1/chat/completions} JSON contract.

    Transport errors, HTTP 429 and server errors are retried, up to
    I{attempts} calls in all, with an exponential backoff. A refused
    credential raises L{AuthError} right away, as does any other
    client error as a L{NetworkError}.

    @keyword transport: An C{httpx} transport to use instead of the
        network, e.g., an C{httpx.MockTransport} for testing.

    @keyword sleep: A callable for waiting between attempts, replaceable
        for testing.
    """
    path = "/v1/chat/completions"
    attempts = 3
    backoff = 1.0
    
    def __init__(
            self, apiKey, baseURL="https://api.openai.com",
            timeout=60.0, transport=None, sleep=time.sleep):
        if not apiKey:
            raise AuthError("No API credential was supplied")
        self.sleep = sleep
        self.client = httpx.Client(
            base_url=baseURL,
            headers={'Authorization': sub("Bearer {}", apiKey)},
            timeout=timeout, transport=transport)

    def close(self):
        self.client.close()
        
    def parse(self, response):
        try:
            data = response.json()
            content = data['choices'][0]['message']['content']
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise NetworkError(sub(
                "Malformed chat-completions response: {}", e),
                               status=response.status_code)
        usage = {}
        for name, value in (data.get('usage') or {}).items():
            if isinstance(value, int):
                usage[name] = value
        return content or "", usage
        
    def post(self, request):
        """
        Sends I{request} upstream and returns a 2-tuple with the reply
        text and a dict of token-usage counters.
        """
        payload = request.payload()
        status = None
        for k in range(self.attempts):
            try:
                response = self.client.post(self.path, json=payload)
            except httpx.TransportError as e:
                status = None
                problem = sub("{}: {}", e.__class__.__name__, e)
            else:
                status = response.status_code
                if status < 400:
                    return self.parse(response)
                if status in (401, 403):
                    raise AuthError(sub(
                        "Credential refused with HTTP {:d}", status))
                if status != 429 and status < 500:
                    raise NetworkError(sub(
                        "Chat completion failed with HTTP {:d}: {}",
                        status, response.text[:200]), status=status)
                problem = sub("HTTP {:d}", status)
            log.warning(
                "Chat completion attempt %d of %d failed: %s",
                k+1, self.attempts, problem)
            if k < self.attempts - 1:
                self.sleep(self.backoff * 2**k)
        raise NetworkError(sub(
            "Chat completion failed after {:d} attempts: {}",
            self.attempts, problem), status=status)


class RateLimiter(object):
    """
    I keep upstream calls at least 1/I{requestsPerSecond} seconds apart,
    across all threads. With no rate given, I never wait.
    """
    def __init__(
            self, requestsPerSecond=None,
            clock=time.monotonic, sleep=time.sleep):
        self.interval = 1.0 / requestsPerSecond if requestsPerSecond else 0
        self.clock = clock
        self.sleep = sleep
        self.lock = threading.Lock()
        self.tLast = None

    def wait(self):
        if not self.interval: return
        with self.lock:
            now = self.clock()
            if self.tLast is not None:
                dt = self.tLast + self.interval - now
                if dt > 0:
                    self.sleep(dt)
                    now += dt
            self.tLast = now


class FixtureStore(object):
    """
    I hold recorded exchanges, loaded from and appended to a JSONL file
    with one C{{key, request, response}} record per line.

    A record without a I{key} gets one computed from its request, so
    fixtures can be written by hand.
    """
    def __init__(self, filePath):
        self.filePath = filePath
        self.records = {}
        self.lock = threading.Lock()
        if os.path.exists(filePath):
            for key, response in readJSONL(filePath, self.loadRecord):
                self.records[key] = response
        log.debug(
            "Fixture store %s has %d records", filePath, len(self.records))

    def __len__(self):
        return len(self.records)

    def __contains__(self, key):
        return key in self.records
    
    @staticmethod
    def loadRecord(line):
        record = json.loads(line)
        request = CompletionRequest.model_validate(record['request'])
        key = record.get('key') or request.key()
        response = record['response']
        if not isinstance(response.get('text'), str):
            raise ValueError("Fixture response has no text")
        return key, response

    def get(self, key):
        """
        Returns a L{CompletionResponse} for the exchange recorded under
        I{key}, or C{None} if there is none.
        """
        response = self.records.get(key)
        if response is None: return
        return CompletionResponse(
            text=response['text'],
            token_usage=response.get('token_usage', {}), cache_hit=True)
    
    def append(self, key, request, response):
        record = {
            'key': key,
            'request': request.model_dump(mode='json'),
            'response': {
                'text': response.text, 'token_usage': response.token_usage},
        }
        line = canonicalJSON(record) + "\n"
        with self.lock:
            if key in self.records: return
            dirPath = os.path.dirname(os.path.abspath(self.filePath))
            if not os.path.isdir(dirPath):
                os.makedirs(dirPath)
            with open(self.filePath, 'a', encoding='utf-8') as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
            self.records[key] = record['response']


class Gateway(object):
    """
    I answer chat-completion requests according to my I{mode}:

        - B{live}: Calls go upstream through my I{endpoint}.
        - B{record}: As live, but each new exchange is appended to the
          fixture file. Exchanges already recorded are served from it.
        - B{replay}: Exchanges come strictly from the fixture file and
          my I{endpoint} is never used.

    In every mode, identical requests within one session are answered
    from memory after the first.

    I am safe to use from multiple threads.

    @ivar calls: The number of upstream calls I have made.

    @ivar usage: A dict of token-usage totals across upstream calls.
    """
    def __init__(
            self, mode=None, endpoint=None,
            requestsPerSecond=None, maxRepairAttempts=2,
            model=DEFAULT_MODEL, temperature=0.0):
        if mode is None: mode = GatewayMode()
        if mode.mode != 'replay' and endpoint is None:
            raise AuthError(sub(
                "Mode '{}' needs a configured endpoint", mode.mode))
        self.mode = mode
        self.endpoint = endpoint
        self.limiter = RateLimiter(requestsPerSecond)
        self.maxRepairAttempts = maxRepairAttempts
        self.model = model
        self.temperature = temperature
        self.fixtures = None
        if mode.fixture_path:
            self.fixtures = FixtureStore(mode.fixture_path)
        self.cache = {}
        self.lock = threading.Lock()
        self.calls = 0
        self.usage = {}

    @classmethod
    def fromOptions(cls, opts, transport=None):
        """
        Returns an instance of me configured from the L{Opts} object
        I{opts}. Outside replay mode, the credential comes from the
        environment variable named by the I{apiKeyEnv} option.
        """
        mode = GatewayMode(
            mode=opts['mode'], fixture_path=opts.path('fixtures'))
        endpoint = None
        if mode.mode != 'replay':
            name = opts['apiKeyEnv']
            apiKey = os.environ.get(name)
            if not apiKey:
                raise AuthError(sub(
                    "Credential variable '{}' is not set", name))
            endpoint = ChatEndpoint(
                apiKey, opts['baseURL'], opts['timeout'], transport=transport)
        return cls(
            mode, endpoint, opts['requestsPerSecond'],
            opts['maxRepairAttempts'], opts['model'],
            float(opts['temperature']))

    def request(self, *prompts, **kw):
        """
        Returns a L{CompletionRequest} with my model and temperature
        and one user message for each of the supplied I{prompts}
        strings, joined by blank lines.
        """
        content = "\n\n".join(prompts)
        return CompletionRequest(
            model=self.model, temperature=self.temperature,
            messages=[ChatMessage(role='user', content=content)], **kw)

    def _upstream(self, key, request):
        if self.fixtures is not None:
            response = self.fixtures.get(key)
            if response is not None:
                return response
        if self.mode.mode == 'replay':
            raise FixtureMiss(key)
        self.limiter.wait()
        text, usage = self.endpoint.post(request)
        response = CompletionResponse(text=text, token_usage=usage)
        with self.lock:
            self.calls += 1
            for name, value in usage.items():
                self.usage[name] = self.usage.get(name, 0) + value
        if self.mode.mode == 'record':
            self.fixtures.append(key, request, response)
        return response
        
    def complete(self, request):
        """
        Returns a L{CompletionResponse} for the L{CompletionRequest}
        I{request}, with I{cache_hit} set if it came from memory or a
        fixture rather than a live call.

        @raise FixtureMiss: In replay mode, for a request not recorded.
        @raise NetworkError: If live calls keep failing.
        @raise AuthError: If the credential is refused.
        """
        key = request.key()
        with self.lock:
            response = self.cache.get(key)
        if response is not None:
            return response.model_copy(update={'cache_hit': True})
        response = self._upstream(key, request)
        with self.lock:
            self.cache[key] = response
        log.debug(
            "Completion %s (%s)", key[:12],
            "cached" if response.cache_hit else "live")
        return response

    def complete_json(self, request, schema, max_repair_attempts=None):
        """
        Returns an instance of the pydantic model class I{schema}
        validated from the model's reply to I{request}.

        Code fences around the reply are stripped before parsing. If
        the reply still isn't valid JSON matching I{schema}, the
        request is extended with the bad reply and an instruction to
        output only the JSON object, and tried again, up to
        I{max_repair_attempts} times (default from my constructor).

        @raise SchemaViolation: When every attempt failed, with all raw
            outputs attached.
        """
        if max_repair_attempts is None:
            max_repair_attempts = self.maxRepairAttempts
        outputs = []
        for k in range(max_repair_attempts+1):
            text = self.complete(request).text
            outputs.append(text)
            try:
                return schema.model_validate(json.loads(stripFences(text)))
            except (ValueError, ValidationError) as e:
                log.debug("Unusable JSON reply, attempt %d: %s", k+1, e)
            request = request.withRepair(text, REPAIR_INSTRUCTION)
        raise SchemaViolation(sub(
            "No reply matched the {} schema in {:d} attempts",
            schema.__name__, len(outputs)), outputs)
