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
The I{dicta} command: the whole pipeline, one stage per subcommand.

Each stage reads the files earlier stages wrote to the output
directory and writes its own there, atomically::

    ingest      corpus.jsonl, corpus.gold.jsonl, citations.jsonl,
                graph.json
    segment     segmented.jsonl
    rst-import  trees.jsonl
    optimize    prompt.json, trace.json
    extract     results/<method>.jsonl
    evaluate    report.json, report.txt
    report      report.png, trace.png

Options come from the defaults, then the YAML file given with
C{--config}, then command-line flags.
"""

import os, sys, glob, json, logging, argparse

from dicta import util, corpus, sectioning, discourse, extraction, \
    evaluation, optimizer
from dicta.chart import Charter
from dicta.errors import DictaError, ConfigError, IdMismatch
from dicta.gateway import Gateway
from dicta.options import Opts
from dicta.templates import Templates
from dicta.util import sub


log = logging.getLogger("dicta")


class Pipeline(object):
    """
    I run the pipeline stages with the settings of an L{Opts} object,
    reading and writing files in its output directory.

    @keyword transport: An C{httpx} transport for the gateway's chat
        endpoint, for testing.
    """
    corpusFile = "corpus.jsonl"
    citationsFile = "citations.jsonl"
    graphFile = "graph.json"
    segmentedFile = "segmented.jsonl"
    treesFile = "trees.jsonl"
    promptFile = "prompt.json"
    traceFile = "trace.json"
    resultsDir = "results"
    
    def __init__(self, opts, transport=None):
        self.opts = opts
        self.transport = transport
        self.outputDir = opts.path('outputDir')
        os.makedirs(self.outputDir, exist_ok=True)
        self._gateway = None

    def outPath(self, *parts):
        return os.path.join(self.outputDir, *parts)

    def exists(self, *parts):
        return os.path.exists(self.outPath(*parts))
    
    @property
    def gateway(self):
        if self._gateway is None:
            self._gateway = Gateway.fromOptions(self.opts, self.transport)
        return self._gateway

    @property
    def prompts(self):
        return Templates(self.opts.path('templateDir'))

    @property
    def featureDef(self):
        return extraction.feature(self.opts['feature'])
    
    def corpus(self):
        filePath = self.outPath(self.corpusFile)
        if not os.path.exists(filePath):
            raise ConfigError(sub(
                "No corpus at '{}', run 'ingest' first", filePath))
        return corpus.load_corpus(filePath)

    def golds(self, theCorpus=None):
        """
        Returns a dict of gold labels (bools) for my feature, from the
        file named by the I{gold} option or else the corpus.
        """
        filePath = self.opts.path('gold')
        if filePath:
            labels = corpus.load_gold(filePath)
            featureID = self.opts['feature']
            return {
                docID: x[featureID] == 'true'
                for docID, x in labels.items() if featureID in x}
        if theCorpus is None: theCorpus = self.corpus()
        return theCorpus.golds(self.opts['feature'])

    def split(self, golds):
        """
        Returns the sorted training and test document IDs split from
        the IDs of I{golds}.
        """
        config = evaluation.SplitConfig(
            train_size=self.opts['trainSize'],
            test_size=self.opts['testSize'], seed=self.opts['seed'])
        try:
            return evaluation.split_documents(list(golds), config)
        except ValueError as e:
            raise ConfigError(str(e))

    def segmented(self):
        if not self.exists(self.segmentedFile): return {}
        return sectioning.load_segmented(self.outPath(self.segmentedFile))

    def trees(self):
        if not self.exists(self.treesFile): return {}
        return discourse.load_trees(self.outPath(self.treesFile))

    def prompt(self):
        """
        Returns the optimized plan prompt if there is one, or the seed
        prompt.
        """
        if self.exists(self.promptFile):
            return extraction.load_prompt(self.outPath(self.promptFile))
        log.info("No optimized plan prompt, using the seed prompt")
        return extraction.PlanPrompt.seed(self.featureDef, self.prompts)

    def artifacts(self, theCorpus, docIDs, method=None):
        """
        Returns a list of L{extraction.Artifacts} for the documents with
        I{docIDs}.

        @raise ConfigError: If I{method} is C{agentic_tod} and any of
            the documents lacks sections or a tree.
        """
        segs, trees = self.segmented(), self.trees()
        if method == 'agentic_tod':
            missing = [x for x in docIDs if x not in segs or x not in trees]
            if missing:
                raise ConfigError(sub(
                    "No sections or tree for {:d} documents ({}), run "
                    "'segment' and 'rst-import' first", len(missing),
                    ", ".join(missing[:5])))
        return [
            extraction.Artifacts(
                theCorpus.document(x), segs.get(x), trees.get(x))
            for x in docIDs]

    #--- Stages ---------------------------------------------------------------
    
    def ingest(self, filePaths, goldPath=None):
        """
        Splits the raw text files at I{filePaths} into cases, writes the
        corpus with any gold labels from the JSONL file at I{goldPath}
        (or the I{gold} option), and writes its citations and citation
        graph.
        """
        splitter = corpus.loadRules(
            corpus.SplitterConfig, self.opts.path('splitterRules'))
        rules = corpus.loadRules(
            corpus.MetadataRules, self.opts.path('metadataRules'))
        documents = []
        for filePath in filePaths:
            try:
                with open(filePath, encoding='utf-8') as fh:
                    text = fh.read()
            except OSError as e:
                raise ConfigError(sub("Can't read '{}': {}", filePath, e))
            docs = corpus.ingest(text, splitter, rules)
            log.info("Read %d cases from '%s'", len(docs), filePath)
            documents.extend(docs)
        documents = corpus.unique(documents)
        labels = {}
        goldPath = goldPath or self.opts.path('gold')
        if goldPath: labels = corpus.load_gold(goldPath)
        try:
            theCorpus = corpus.Corpus(documents=documents, gold_labels=labels)
        except ValueError as e:
            raise ConfigError(sub("Can't build corpus: {}", e))
        corpus.save_corpus(theCorpus, self.outPath(self.corpusFile))
        citationRules = corpus.loadRules(
            corpus.CitationRules, self.opts.path('citationRules'))
        citations = []
        for doc in theCorpus.documents:
            citations.extend(corpus.extract_citations(doc, citationRules))
        util.writeJSONL(self.outPath(self.citationsFile), [
            x.model_dump_json() for x in citations])
        graph = corpus.build_graph(theCorpus, citations)
        util.writeJSON(self.outPath(self.graphFile), graph.export())
        log.info(
            "Corpus of %d cases with %d citations", len(theCorpus),
            len(citations))
        return theCorpus

    def segment(self):
        """
        Segments and labels the opinion of every corpus document.
        """
        theCorpus = self.corpus()
        gateway, prompts = self.gateway, self.prompts
        segs = []
        for doc in theCorpus.documents:
            seg = sectioning.segment(
                doc, gateway, prompts, self.opts['contextChars'])
            seg = sectioning.label_all(
                seg, doc, gateway, self.opts['parallelism'],
                prompts=prompts, policy=self.opts['invalidLabelPolicy'],
                contextChars=self.opts['contextChars'])
            log.info(
                "%s: %d sections, %s", doc.id, len(seg.sections),
                ", ".join(seg.labels()))
            segs.append(seg)
        sectioning.save_segmented(segs, self.outPath(self.segmentedFile))
        return segs

    def rstImport(self, filePaths, fallback=False):
        """
        Imports and validates the discourse trees in the files at
        I{filePaths}, each either a JSONL tree store or a single tree
        as JSON. With I{fallback} (or the I{fallbackTrees} option), a
        right-branching tree over sentences is made for each document
        without one.
        """
        theCorpus = self.corpus()
        known = set(theCorpus.ids())
        trees = {}
        for filePath in filePaths:
            try:
                if filePath.endswith(".jsonl"):
                    loaded = list(
                        util.readJSONL(filePath, discourse.parse_tree))
                else:
                    with open(filePath, encoding='utf-8') as fh:
                        loaded = [discourse.parse_tree(fh.read())]
            except OSError as e:
                raise ConfigError(sub("Can't read '{}': {}", filePath, e))
            for tree in loaded:
                if tree.doc_id not in known:
                    log.warning(
                        "Skipping tree for unknown document '%s'",
                        tree.doc_id)
                    continue
                trees[tree.doc_id] = tree
        if fallback or self.opts['fallbackTrees']:
            for doc in theCorpus.documents:
                if doc.id in trees: continue
                log.info("Fallback tree for %s", doc.id)
                trees[doc.id] = discourse.fallback_tree(
                    discourse.sentence_edus(doc.opinion_text), doc.id)
        trees = [trees[x] for x in theCorpus.ids() if x in trees]
        discourse.save_trees(trees, self.outPath(self.treesFile))
        log.info("Stored %d trees", len(trees))
        return trees

    def optimize(self, method='agentic_tod'):
        """
        Refines the seed plan prompt on the training split and writes
        the best prompt and the trace.
        """
        theCorpus = self.corpus()
        golds = self.golds(theCorpus)
        trainIDs = self.split(golds)[0]
        train = [
            optimizer.TrainItem(x, golds[x.doc.id])
            for x in self.artifacts(theCorpus, trainIDs)]
        budget = optimizer.Budget(
            max_iterations=self.opts['maxIterations'],
            minibatch_size=self.opts['minibatchSize'])
        extractor = extraction.Extractor.fromOptions(self.gateway, self.opts)
        seed = extraction.PlanPrompt.seed(self.featureDef, extractor.prompts)
        po = optimizer.PlanOptimizer(
            extractor, method, self.opts['parallelism'], self.opts['seed'])
        best, trace = po(train, seed, budget)
        extraction.save_prompt(best, self.outPath(self.promptFile))
        optimizer.save_trace(trace, self.outPath(self.traceFile))
        return best, trace
    
    def extract(self, method):
        """
        Runs I{method} (or every method, for C{all}) on the test split
        and writes the results.
        """
        methods = extraction.METHODS if method == 'all' else [method]
        theCorpus = self.corpus()
        golds = self.golds(theCorpus)
        if golds:
            testIDs = self.split(golds)[1]
        else: testIDs = theCorpus.ids()
        os.makedirs(self.outPath(self.resultsDir), exist_ok=True)
        allResults = {}
        for method in methods:
            if method == 'random':
                results = extraction.run_random(
                    {x: golds.get(x) for x in testIDs},
                    self.opts['pPositive'], self.opts['seed'],
                    self.opts['feature'])
            else:
                extractor = extraction.Extractor.fromOptions(
                    self.gateway, self.opts)
                prompt = self.prompt()
                results = util.parallelMap(
                    lambda x: extractor(method, x, prompt),
                    self.artifacts(theCorpus, testIDs, method),
                    self.opts['parallelism'])
            extraction.save_results(
                results, self.outPath(self.resultsDir, method + ".jsonl"))
            allResults[method] = results
        return allResults

    def evaluate(self, filePaths=None):
        """
        Compares the results in the files at I{filePaths} (by default,
        every results file) against the gold labels and writes the
        report.

        Every method must cover the documents of the first one.
        """
        if not filePaths:
            filePaths = sorted(glob.glob(
                self.outPath(self.resultsDir, "*.jsonl")))
        if not filePaths:
            raise ConfigError("No results to evaluate, run 'extract' first")
        results = {}
        for filePath in filePaths:
            loaded = extraction.load_results(filePath)
            if not loaded:
                log.warning("No results in '%s'", filePath)
                continue
            results[loaded[0].method] = loaded
        if not results:
            raise ConfigError("All results files are empty")
        golds = self.golds()
        docIDs = {x.doc_id for x in next(iter(results.values()))}
        missing = docIDs - set(golds)
        if missing:
            raise IdMismatch(missing, [])
        golds = {x: golds[x] for x in docIDs}
        report = evaluation.compare(
            results, golds, p_positive=self.opts['pPositive'])
        evaluation.save_report(report, self.outPath("report.json"))
        util.atomicWrite(self.outPath("report.txt"), report.text())
        return report

    def report(self):
        """
        Draws the charts for the evaluation report and, if there is one,
        the optimization trace.
        """
        if not self.exists("report.json"):
            raise ConfigError("No report to chart, run 'evaluate' first")
        report = evaluation.load_report(self.outPath("report.json"))
        sys.stdout.write(report.text())
        Charter().barMetrics(report, self.outPath("report.png"))
        if self.exists(self.traceFile):
            trace = optimizer.load_trace(self.outPath(self.traceFile))
            if trace.iterations:
                Charter().traceCurve(trace, self.outPath("trace.png"))
        return report


def parser():
    """
    Returns the argument parser for my subcommands.
    """
    ap = argparse.ArgumentParser(
        prog="dicta",
        description="Discourse-based LLM analysis of court opinions")
    ap.add_argument('-c', '--config', help="YAML config file")
    ap.add_argument('--mode', choices=Opts.modes, help="LLM gateway mode")
    ap.add_argument('--fixtures', help="Fixture JSONL for record/replay")
    ap.add_argument('--seed', type=int, help="Random seed")
    ap.add_argument('-o', '--output-dir', help="Output directory")
    ap.add_argument('--model', help="Model ID")
    ap.add_argument('--parallelism', type=int, help="Concurrent LLM calls")
    ap.add_argument('-v', '--verbose', action='store_true',
                    help="Log debug messages")
    sp = ap.add_subparsers(dest='command', required=True)
    p = sp.add_parser('ingest', help="Split raw case files into a corpus")
    p.add_argument('inputs', nargs='+', help="Raw text files")
    p.add_argument('--gold', help="Gold-label JSONL")
    sp.add_parser('segment', help="Segment and label opinions")
    p = sp.add_parser('rst-import', help="Import discourse trees")
    p.add_argument('inputs', nargs='*', help="Tree JSONL or JSON files")
    p.add_argument('--fallback', action='store_true',
                   help="Make sentence trees for documents without one")
    p = sp.add_parser('optimize', help="Optimize the plan prompt")
    p.add_argument('--method', choices=('agentic', 'agentic_tod'),
                   default='agentic_tod')
    p.add_argument('--max-iterations', type=int)
    p = sp.add_parser('extract', help="Extract the feature")
    p.add_argument('--method', choices=extraction.METHODS+('all',),
                   default='all')
    p = sp.add_parser('evaluate', help="Score results against gold labels")
    p.add_argument('inputs', nargs='*', help="Results JSONL files")
    sp.add_parser('report', help="Chart the evaluation and optimization")
    return ap

def options(args):
    """
    Returns a validated L{Opts} object for the parsed I{args}.
    """
    opts = Opts.fromFile(args.config) if args.config else Opts()
    opts.newLocal()
    opts.update({
        'mode': args.mode,
        'fixtures': args.fixtures,
        'seed': args.seed,
        'outputDir': args.output_dir,
        'model': args.model,
        'parallelism': args.parallelism,
        'maxIterations': getattr(args, 'max_iterations', None),
    })
    return opts.validate()

def run(args, transport=None):
    """
    Runs the subcommand of the parsed I{args}.
    """
    pipeline = Pipeline(options(args), transport)
    command = args.command
    if command == 'ingest':
        pipeline.ingest(args.inputs, args.gold)
    elif command == 'segment':
        pipeline.segment()
    elif command == 'rst-import':
        pipeline.rstImport(args.inputs, args.fallback)
    elif command == 'optimize':
        pipeline.optimize(args.method)
    elif command == 'extract':
        pipeline.extract(args.method)
    elif command == 'evaluate':
        pipeline.evaluate(args.inputs)
    elif command == 'report':
        pipeline.report()

def main(argv=None, transport=None):
    """
    The I{dicta} entry point. Returns the exit code: 0 on success, 2
    for a configuration error, and 1 for any other pipeline or I/O
    error. An error is reported as one JSON line on standard error.
    """
    args = parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr)
    try:
        run(args, transport)
    except (DictaError, OSError) as e:
        sys.stderr.write(json.dumps({
            'error': e.__class__.__name__,
            'message': str(e),
            'command': args.command}) + "\n")
        return 2 if isinstance(e, ConfigError) else 1
    return 0

def entry():
    sys.exit(main())
