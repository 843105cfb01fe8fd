"""Batched log-domain sum-product decoding with numpy.

Decodes ``B`` received words at once; messages have shape ``(B, E, q)``.
Iterations follow the same flooding schedule as :mod:`ringdec.sp`, and with
early exit each word keeps the decision of the first iteration at which it
was an untied codeword.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sp import TIE_TOL, SpDecodeResult


def _lse(x, axis):
    top = np.max(x, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - safe), axis=axis, keepdims=True)) + safe
    return np.squeeze(out, axis=axis)


def _center(x):
    top = np.max(x, axis=-1, keepdims=True)
    return x - np.where(np.isfinite(top), top, 0.0)


class _Graph:
    def __init__(self, code):
        r = code.ring
        self.q = r.q
        E = len(code.edges)
        self.var_of_edge = np.array([i for (_, i) in code.edges], dtype=np.int64)
        width = max((len(s) for s in code.col_supports), default=1)
        # other edges on the same variable, padded with a dummy edge E that stays 0
        others = np.full((E, max(width - 1, 1)), E, dtype=np.int64)
        for e, (j, i) in enumerate(code.edges):
            ids = [code.edge_id[(l, i)] for l in code.col_supports[i] if l != j]
            others[e, :len(ids)] = ids
        self.others = others
        self.var_edges = np.full((code.n, width), E, dtype=np.int64)
        for i, supp in enumerate(code.col_supports):
            ids = [code.edge_id[(j, i)] for j in supp]
            self.var_edges[i, :len(ids)] = ids
        self.checks = []
        for j, supp in enumerate(code.row_supports):
            eids = [code.edge_id[(j, i)] for i in supp]
            coeffs = [int(code.h[j, i]) for i in supp]
            self.checks.append((eids, coeffs))
        # log-masks for pushing x -> x*h
        self.push = {}
        for h in range(r.q):
            m = np.full((r.q, r.q), -np.inf)
            for x in range(r.q):
                m[x, r.mul_table[x, h]] = 0.0
            self.push[h] = m
        self.sub = np.asarray(r.sub_table)
        # target syndrome index for -(a*h)
        self.target = {h: np.array([r.neg_table[r.mul_table[a, h]] for a in range(r.q)]) for h in range(r.q)}


def _conv(a, b, sub):
    # out[:, s] = lse_t a[:, t] + b[:, s - t]
    return _lse(a[:, None, :] + b[:, sub], axis=2)


@dataclass
class BatchResult:
    words: np.ndarray
    tied: np.ndarray
    iterations: np.ndarray
    codeword: np.ndarray
    g: np.ndarray

    def status(self, b):
        if self.tied[b].any():
            return "failure-tie"
        return "codeword" if self.codeword[b] else "failure-noncodeword"

    def result(self, b):
        return SpDecodeResult(self.status(b), tuple(int(v) for v in self.words[b]), int(self.iterations[b]),
                              [], self.g[b].tolist(), tuple(bool(t) for t in self.tied[b]))


def _syndrome_ok(code, words):
    r = code.ring
    ok = np.ones(len(words), dtype=bool)
    for j, supp in enumerate(code.row_supports):
        s = np.zeros(len(words), dtype=np.int64)
        for i in supp:
            s = r.add_table[s, r.mul_table[words[:, i], code.h[j, i]]]
        ok &= s == 0
    return ok


def decode_batch(code, log_priors, max_iters, *, early_exit=True, tie_tol=TIE_TOL, graph=None):
    """Decode every row of ``log_priors`` (shape ``(B, n, q)``)."""
    g_ = graph or _Graph(code)
    L = _center(np.asarray(log_priors, dtype=float))
    B, n, q = L.shape
    E = len(code.edges)
    down = np.zeros((B, E + 1, q))
    done = np.zeros(B, dtype=bool)
    words = np.zeros((B, n), dtype=np.int64)
    tied = np.zeros((B, n), dtype=bool)
    iters = np.zeros(B, dtype=np.int64)
    gsum = np.zeros((B, n, q))
    for k in range(1, max_iters + 1):
        up = L[:, g_.var_of_edge, :] + down[:, g_.others, :].sum(axis=2)
        up = _center(up)
        new_down = np.zeros_like(down)
        for eids, coeffs in g_.checks:
            if not eids:
                continue
            pushed = [_lse(up[:, e, :, None] + g_.push[c][None], axis=1) for e, c in zip(eids, coeffs)]
            delta = np.full((B, q), -np.inf)
            delta[:, 0] = 0.0
            d = len(eids)
            prefix = [delta]
            for t in range(d - 1):
                prefix.append(_conv(prefix[-1], pushed[t], g_.sub))
            suffix = [delta] * (d + 1)
            for t in range(d - 1, 0, -1):
                suffix[t] = _conv(pushed[t], suffix[t + 1], g_.sub)
            for t, (e, c) in enumerate(zip(eids, coeffs)):
                excl = _conv(prefix[t], suffix[t + 1], g_.sub)
                new_down[:, e, :] = _center(excl[:, g_.target[c]])
        down = new_down
        g = L + down[:, g_.var_edges, :].sum(axis=2)
        g = _center(g)
        top = g.max(axis=2, keepdims=True)
        best = g >= top - tie_tol
        h = np.argmax(g, axis=2)
        t_now = best.sum(axis=2) > 1
        ok = ~t_now.any(axis=1) & _syndrome_ok(code, h)
        take = ~done if k == max_iters or not early_exit else (~done & ok)
        words[take] = h[take]
        tied[take] = t_now[take]
        iters[take] = k
        gsum[take] = g[take]
        if early_exit:
            done |= take
            if done.all():
                break
    cw = _syndrome_ok(code, words)
    return BatchResult(words, tied, iters, cw, gsum)
