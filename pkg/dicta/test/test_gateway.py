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
Unit tests for L{gateway}.
"""

import os, json

import httpx
from pydantic import BaseModel, ValidationError
from twisted.trial.unittest import TestCase

from dicta.errors import AuthError, NetworkError, FixtureMiss, \
    SchemaViolation
from dicta import gateway, options
from dicta.test import testbase as tb


class Answer(BaseModel):
    answer: int


def chatResponse(content, status=200):
    return httpx.Response(status, json={
        'choices': [{'message': {'role': 'assistant', 'content': content}}],
        'usage': {'prompt_tokens': 12, 'completion_tokens': 3},
    })


class Test_CompletionRequest(TestCase):
    def request(self, *messages, **kw):
        return gateway.CompletionRequest(messages=[
            {'role': role, 'content': content}
            for role, content in messages], **kw)
    
    def test_defaults(self):
        request = self.request(('user', "Hi"))
        self.assertEqual(request.model, "gpt-4o-mini")
        self.assertEqual(request.temperature, 0.0)
        self.assertEqual(request.payload(), {
            'model': "gpt-4o-mini", 'temperature': 0.0,
            'messages': [{'role': 'user', 'content': "Hi"}]})

    def test_invalid(self):
        self.assertRaises(ValidationError, self.request)
        self.assertRaises(
            ValidationError, self.request, ('assistant', "Hello"))
        self.assertRaises(ValidationError, self.request, ('user', ""))
        self.assertRaises(
            ValidationError, self.request, ('user', "Hi"), temperature=-1)
        self.request(('system', "Be brief."), ('user', "Hi"))

    def test_key(self):
        a = self.request(('user', "Hi"))
        self.assertEqual(a.key(), self.request(('user', "Hi")).key())
        self.assertNotEqual(
            a.key(), self.request(('user', "Hi"), temperature=0.5).key())
        self.assertNotEqual(a.key(), self.request(('user', "Hi!")).key())
        self.assertNotEqual(
            a.key(), self.request(('user', "Hi"), max_output_tokens=9).key())

    def test_maxTokens(self):
        request = self.request(('user', "Hi"), max_output_tokens=50)
        self.assertEqual(request.payload()['max_tokens'], 50)

    def test_withRepair(self):
        request = self.request(('user', "Hi"))
        repaired = request.withRepair("not json", "Fix it")
        self.assertEqual(
            [x.role for x in repaired.messages],
            ['user', 'assistant', 'user'])
        self.assertEqual(len(request.messages), 1)
        repaired = request.withRepair("  ", "Fix it")
        self.assertEqual(
            [x.role for x in repaired.messages], ['user', 'user'])


class Test_StripFences(TestCase):
    def test_fenced(self):
        self.assertEqual(
            gateway.stripFences('```json\n{"a": 1}\n```'), '{"a": 1}')
        self.assertEqual(
            gateway.stripFences('  ```\n{"a": 1}\n```  '), '{"a": 1}')

    def test_unfenced(self):
        self.assertEqual(gateway.stripFences(' {"a": 1}\n'), '{"a": 1}')
        text = 'Here it is: ```{"a": 1}```'
        self.assertEqual(gateway.stripFences(text), text)


class Test_ChatEndpoint(TestCase):
    def setUp(self):
        self.sleeps = []
        self.httpRequests = []
        self.request = gateway.CompletionRequest(
            messages=[{'role': 'user', 'content': "Hi"}])

    def endpoint(self, *responses):
        responses = list(responses)

        def handler(request):
            self.httpRequests.append(request)
            response = responses.pop(0)
            if isinstance(response, Exception):
                raise response
            return response
        
        return gateway.ChatEndpoint(
            "sk-test", "https://llm.example.com",
            transport=httpx.MockTransport(handler),
            sleep=self.sleeps.append)
    
    def test_success(self):
        text, usage = self.endpoint(chatResponse("Hello")).post(self.request)
        self.assertEqual(text, "Hello")
        self.assertEqual(
            usage, {'prompt_tokens': 12, 'completion_tokens': 3})
        httpRequest = self.httpRequests[0]
        self.assertEqual(httpRequest.url.path, "/v1/chat/completions")
        self.assertEqual(
            httpRequest.headers['Authorization'], "Bearer sk-test")
        self.assertEqual(
            json.loads(httpRequest.content), self.request.payload())
        self.assertEqual(self.sleeps, [])

    def test_retriesRateLimit(self):
        endpoint = self.endpoint(
            httpx.Response(429), httpx.Response(503), chatResponse("Hello"))
        text, usage = endpoint.post(self.request)
        self.assertEqual(text, "Hello")
        self.assertEqual(self.sleeps, [1.0, 2.0])

    def test_givesUp(self):
        endpoint = self.endpoint(*[httpx.Response(500) for k in range(3)])
        try:
            endpoint.post(self.request)
        except NetworkError as e:
            self.assertEqual(e.status, 500)
        else: self.fail("No NetworkError raised")
        self.assertEqual(len(self.httpRequests), 3)
        self.assertEqual(self.sleeps, [1.0, 2.0])

    def test_transportError(self):
        errors = [httpx.ConnectError("Connection refused") for k in range(3)]
        try:
            self.endpoint(*errors).post(self.request)
        except NetworkError as e:
            self.assertIsNone(e.status)
        else: self.fail("No NetworkError raised")

    def test_authRefused(self):
        endpoint = self.endpoint(httpx.Response(401))
        self.assertRaises(AuthError, endpoint.post, self.request)
        self.assertEqual(len(self.httpRequests), 1)

    def test_clientError(self):
        endpoint = self.endpoint(httpx.Response(400, text="bad model"))
        try:
            endpoint.post(self.request)
        except NetworkError as e:
            self.assertEqual(e.status, 400)
        else: self.fail("No NetworkError raised")
        self.assertEqual(self.sleeps, [])

    def test_malformed(self):
        endpoint = self.endpoint(httpx.Response(200, json={'choices': []}))
        self.assertRaises(NetworkError, endpoint.post, self.request)

    def test_noCredential(self):
        self.assertRaises(AuthError, gateway.ChatEndpoint, "")


class Test_RateLimiter(TestCase):
    def test_spacing(self):
        sleeps = []
        limiter = gateway.RateLimiter(
            2.0, clock=lambda: 10.0, sleep=sleeps.append)
        for k in range(3):
            limiter.wait()
        self.assertEqual(sleeps, [0.5, 1.0])

    def test_unlimited(self):
        sleeps = []
        limiter = gateway.RateLimiter(sleep=sleeps.append)
        limiter.wait()
        limiter.wait()
        self.assertEqual(sleeps, [])


class Test_Gateway(TestCase):
    def setUp(self):
        self.fixturePath = self.mktemp()
        self.count = 0

    def reply(self, request):
        self.count += 1
        return "Reply {:d}".format(self.count)
    
    def test_liveAndSessionCache(self):
        gw = tb.gateway(self.reply)
        request = gw.request("What is", "two plus two?")
        self.assertEqual(
            request.messages[0].content, "What is\n\ntwo plus two?")
        first = gw.complete(request)
        self.assertFalse(first.cache_hit)
        second = gw.complete(request)
        self.assertTrue(second.cache_hit)
        self.assertEqual(first.text, second.text)
        self.assertEqual(gw.calls, 1)
        self.assertEqual(len(gw.endpoint.requests), 1)
        self.assertEqual(
            gw.usage, {'prompt_tokens': 10, 'completion_tokens': 5})

    def test_usageTotals(self):
        gw = tb.gateway(self.reply)
        gw.complete(gw.request("One"))
        gw.complete(gw.request("Two"))
        self.assertEqual(gw.calls, 2)
        self.assertEqual(gw.usage['prompt_tokens'], 20)
    
    def test_recordThenReplay(self):
        gw = tb.gateway(self.reply, 'record', self.fixturePath)
        texts = [gw.complete(gw.request(x)).text for x in ("A", "B")]
        self.assertEqual(gw.calls, 2)
        with open(self.fixturePath) as fh:
            self.assertEqual(len(fh.readlines()), 2)
        replayer = gateway.Gateway(gateway.GatewayMode(
            mode='replay', fixture_path=self.fixturePath))
        for k, x in enumerate(("A", "B")):
            response = replayer.complete(replayer.request(x))
            self.assertEqual(response.text, texts[k])
            self.assertTrue(response.cache_hit)
        self.assertEqual(replayer.calls, 0)

    def test_recordServesRecorded(self):
        gw = tb.gateway(self.reply, 'record', self.fixturePath)
        gw.complete(gw.request("A"))
        again = gateway.Gateway(
            gateway.GatewayMode(mode='record', fixture_path=self.fixturePath),
            tb.FailingEndpoint())
        self.assertEqual(again.complete(again.request("A")).text, "Reply 1")
        self.assertEqual(again.calls, 0)
        with open(self.fixturePath) as fh:
            self.assertEqual(len(fh.readlines()), 1)

    def test_fixtureMiss(self):
        gw = tb.gateway(self.reply, 'record', self.fixturePath)
        gw.complete(gw.request("A"))
        replayer = gateway.Gateway(gateway.GatewayMode(
            mode='replay', fixture_path=self.fixturePath))
        request = replayer.request("Never asked")
        try:
            replayer.complete(request)
        except FixtureMiss as e:
            self.assertEqual(e.key, request.key())
        else: self.fail("No FixtureMiss raised")

    def test_handWrittenFixture(self):
        record = {
            'request': {
                'model': "gpt-4o-mini", 'temperature': 0.0,
                'messages': [{'role': 'user', 'content': "Ping"}]},
            'response': {'text': "Pong"},
        }
        with open(self.fixturePath, 'w') as fh:
            fh.write(json.dumps(record) + "\n\n")
        replayer = gateway.Gateway(gateway.GatewayMode(
            mode='replay', fixture_path=self.fixturePath))
        response = replayer.complete(replayer.request("Ping"))
        self.assertEqual(response.text, "Pong")
        self.assertEqual(response.token_usage, {})

    def test_needsEndpoint(self):
        self.assertRaises(AuthError, gateway.Gateway, gateway.GatewayMode())
        self.assertRaises(
            ValidationError, gateway.GatewayMode, mode='record')

    def test_fromOptions(self):
        opts = options.Opts()
        with open(self.fixturePath, 'w') as fh:
            fh.write("")
        opts.update({'mode': "replay", 'fixtures': self.fixturePath})
        gw = gateway.Gateway.fromOptions(opts)
        self.assertIsNone(gw.endpoint)
        self.assertEqual(len(gw.fixtures), 0)
        opts.update({'mode': "live", 'apiKeyEnv': "DICTA_NO_SUCH_KEY"})
        os.environ.pop('DICTA_NO_SUCH_KEY', None)
        self.assertRaises(AuthError, gateway.Gateway.fromOptions, opts)

    def test_fromOptionsLive(self):
        os.environ['DICTA_TEST_KEY'] = "sk-test"
        self.addCleanup(os.environ.pop, 'DICTA_TEST_KEY', None)
        opts = options.Opts()
        opts.update({
            'apiKeyEnv': "DICTA_TEST_KEY", 'model': "local-model",
            'temperature': 0})
        transport = httpx.MockTransport(lambda r: chatResponse("Hi there"))
        gw = gateway.Gateway.fromOptions(opts, transport)
        request = gw.request("Hi")
        self.assertEqual(request.model, "local-model")
        self.assertEqual(gw.complete(request).text, "Hi there")


class Test_CompleteJSON(TestCase):
    def test_valid(self):
        gw = tb.gateway(lambda r: '```json\n{"answer": 4}\n```')
        self.assertEqual(gw.complete_json(gw.request("2+2?"), Answer).answer, 4)

    def test_repaired(self):
        def responder(request):
            if len(request.messages) == 1:
                return "The answer is four."
            return '{"answer": 4}'

        gw = tb.gateway(responder)
        result = gw.complete_json(gw.request("2+2?"), Answer)
        self.assertEqual(result.answer, 4)
        repair = gw.endpoint.requests[1]
        self.assertEqual(
            [x.role for x in repair.messages], ['user', 'assistant', 'user'])
        self.assertEqual(repair.messages[1].content, "The answer is four.")
        self.assertEqual(
            repair.messages[2].content, gateway.REPAIR_INSTRUCTION)

    def test_violation(self):
        replies = iter(['{"answer": "four"}', "four", "4!"])
        gw = tb.gateway(lambda r: next(replies), maxRepairAttempts=2)
        try:
            gw.complete_json(gw.request("2+2?"), Answer)
        except SchemaViolation as e:
            self.assertEqual(e.outputs, ['{"answer": "four"}', "four", "4!"])
        else: self.fail("No SchemaViolation raised")

    def test_noRepairs(self):
        gw = tb.gateway(lambda r: "nope")
        try:
            gw.complete_json(gw.request("?"), Answer, max_repair_attempts=0)
        except SchemaViolation as e:
            self.assertEqual(e.outputs, ["nope"])
        else: self.fail("No SchemaViolation raised")

