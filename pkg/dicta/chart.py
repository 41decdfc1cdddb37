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
PNG charts of a method comparison and of an optimization trace.
"""

import importlib, logging

import numpy as np

from dicta.evaluation import COLUMNS, DISPLAY_NAMES


log = logging.getLogger(__name__)


class Charter(object):
    """
    I draw one chart on a Matplotlib figure and write it as a PNG
    file, always with the Agg backend.

    @keyword figSize: A 2-sequence with the figure width and height in
        inches, if not the default.
    """
    DPI = 100
    figSize = (8.0, 5.0)
    fontsize = 10
    
    @classmethod
    def setupClass(cls):
        """
        Sets a class-wide Matplotlib pyplot import, using the Agg
        renderer, the first time it's called.
        """
        if getattr(cls, 'plt', None): return
        mpl = importlib.import_module("matplotlib")
        mpl.use('Agg')
        cls.plt = importlib.import_module("matplotlib.pyplot")
    
    def __init__(self, figSize=None):
        self.setupClass()
        if figSize is None: figSize = self.figSize
        self.fig = self.plt.figure(figsize=figSize, dpi=self.DPI)
        self.ax = self.fig.add_subplot(111)

    def save(self, filePath=None, fh=None):
        """
        Writes my figure as PNG data to the file at I{filePath} or the
        open file-like object I{fh}, and closes the figure.
        """
        self.fig.tight_layout()
        if fh is None:
            with open(filePath, 'wb') as fh:
                self.fig.savefig(fh, format='png')
        else: self.fig.savefig(fh, format='png')
        self.plt.close(self.fig)
        if filePath: log.info("Wrote chart to '%s'", filePath)

    def barMetrics(self, report, filePath=None, fh=None):
        """
        Draws grouped bars of the four metrics for each method of the
        evaluation L{Report} I{report} and saves the chart.
        """
        ax = self.ax
        N = len(report.rows)
        X = np.arange(len(COLUMNS))
        width = 0.8 / N
        for k, row in enumerate(report.rows):
            ax.bar(
                X + (k - 0.5*(N-1))*width, row.values(), width,
                label=DISPLAY_NAMES.get(row.method, row.method))
        ax.set_xticks(X)
        ax.set_xticklabels([x.upper() for x in COLUMNS])
        ax.set_ylim(0.0, 1.05)
        ax.set_ylabel("Score", fontsize=self.fontsize)
        ax.set_title(
            "Method comparison (N = {:d})".format(report.n),
            fontsize=self.fontsize+2)
        ax.legend(fontsize=self.fontsize-1, loc='lower right')
        ax.grid(True, axis='y', alpha=0.3)
        self.save(filePath, fh)

    def traceCurve(self, trace, filePath=None, fh=None):
        """
        Draws the training accuracy of each optimization iteration in
        the L{optimizer.OptimizationTrace} I{trace}, with accepted
        revisions marked, and the best accuracy so far, and saves the
        chart.
        """
        ax = self.ax
        X = np.arange(len(trace.iterations))
        Y = [x.train_accuracy for x in trace.iterations]
        ax.plot(X, trace.bestCurve(), 'b-', drawstyle='steps-post',
                label="Best so far")
        ax.plot(X, Y, 'k.', label="Candidate")
        accepted = [k for k, x in enumerate(trace.iterations) if x.accepted]
        ax.plot(accepted, [Y[k] for k in accepted], 'go', mfc='none',
                label="Accepted")
        ax.set_xlabel("Iteration", fontsize=self.fontsize)
        ax.set_ylabel("Training accuracy", fontsize=self.fontsize)
        ax.set_ylim(0.0, 1.05)
        ax.set_title(
            "Plan prompt optimization: {}".format(trace.feature_id),
            fontsize=self.fontsize+2)
        ax.legend(fontsize=self.fontsize-1, loc='lower right')
        ax.grid(True, alpha=0.3)
        self.save(filePath, fh)
