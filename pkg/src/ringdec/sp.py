"""Flooding sum-product decoding over a finite ring.

The probability-domain decoder here is the reference.  It is written over
plain Python numbers, so feeding it :class:`fractions.Fraction` priors (as
an exact discrete channel does) gives exact rational messages; message
normalisation is then switched off so the recursions are carried out
literally.  :mod:`ringdec.sp_log` holds a vectorised log-domain backend for
Monte Carlo work.

Ties in the final argmax are reported as ``failure-tie`` and count as
decoding errors: a fixed tie-breaking rule would not commute with the
codeword shift that makes error rates codeword independent.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvalidParameterError

TIE_TOL = 1e-12


@dataclass
class MessageState:
    priors: list            # priors[i][a] = p(y_i | a), possibly rescaled
    up: list                # up[e][a], edge e = code.edges[e]
    down: list              # down[e][a]
    k: int = 0
    normalize: bool = True
    history: list | None = None

    def down_message(self, code, j, i):
        return self.down[code.edge_id[(j, i)]]

    def up_message(self, code, j, i):
        return self.up[code.edge_id[(j, i)]]


@dataclass
class SpDecodeResult:
    status: str             # "codeword", "failure-noncodeword" or "failure-tie"
    word: tuple
    iterations_used: int
    syndrome_trace: list
    g: list
    tied: tuple
    history: list | None = field(default=None, repr=False)


def _normalized(vec):
    s = sum(vec)
    if s == 0:
        return list(vec)
    return [v / s for v in vec]


def priors_from_channel(channel, received, normalize):
    if channel.exact:
        return [list(row) for row in channel.likelihood_table(received)]
    ll = np.asarray(channel.log_likelihood_table(received), dtype=float)
    if normalize:
        top = ll.max(axis=1, keepdims=True)
        top = np.where(np.isfinite(top), top, 0.0)
        p = np.exp(ll - top)
        return (p / p.sum(axis=1, keepdims=True)).tolist()
    return np.exp(ll).tolist()


def init_messages(code, channel, received, *, normalize=None, record=False):
    """Channel priors and all-ones downward messages."""
    normalize = (not channel.exact) if normalize is None else normalize
    return init_from_priors(code, priors_from_channel(channel, received, normalize),
                            normalize=normalize, record=record)


def init_from_priors(code, priors, *, normalize=None, record=False):
    q = code.ring.q
    priors = [list(row) for row in priors]
    if len(priors) != code.n or any(len(row) != q for row in priors):
        raise InvalidParameterError(f"priors must be {code.n} x {q}")
    exact = all(isinstance(v, (int, Fraction)) for row in priors for v in row)
    if normalize is None:
        normalize = not exact
    if normalize:
        priors = [_normalized(row) for row in priors]
    one = Fraction(1) if exact else 1.0
    down = [[one] * q for _ in code.edges]
    up = [list(priors[i]) for (_, i) in code.edges]
    hist = [] if record else None
    return MessageState(priors, up, down, 0, normalize, hist)


def variable_update(code, state):
    """Upward messages: prior times the downward messages from the other checks."""
    q = code.ring.q
    up = []
    for (j, i) in code.edges:
        msg = list(state.priors[i])
        for l in code.col_supports[i]:
            if l != j:
                d = state.down[code.edge_id[(l, i)]]
                msg = [msg[a] * d[a] for a in range(q)]
        up.append(_normalized(msg) if state.normalize else msg)
    return up


def _push(vec, coeff, ring):
    """Distribution of ``x * coeff`` given weights ``vec[x]``."""
    out = [vec[0] * 0] * ring.q
    row = [ring._mul[x][coeff] for x in range(ring.q)]
    for x, v in enumerate(vec):
        if v:
            out[row[x]] += v
    return out


def _conv(a, b, ring):
    out = [a[0] * 0] * ring.q
    add = ring._add
    for t, va in enumerate(a):
        if va:
            row = add[t]
            for u, vb in enumerate(b):
                if vb:
                    out[row[u]] += va * vb
    return out


def check_update(code, state, up=None):
    """Downward messages by prefix/suffix convolution over the check syndrome.

    For edge ``(j, i)`` and element ``a`` this sums, over assignments of the
    other variables with ``sum d_l h_{j,l} = -a h_{j,i}``, the product of
    their upward messages.
    """
    ring = code.ring
    q = ring.q
    up = state.up if up is None else up
    down = [None] * len(code.edges)
    for j, supp in enumerate(code.row_supports):
        if not supp:
            continue
        eids = [code.edge_id[(j, i)] for i in supp]
        coeffs = [int(code.h[j, i]) for i in supp]
        zero = up[eids[0]][0] * 0
        delta = [zero] * q
        delta[0] = zero + 1
        pushed = [_push(up[e], c, ring) for e, c in zip(eids, coeffs)]
        d = len(supp)
        prefix = [delta]
        for k in range(d - 1):
            prefix.append(_conv(prefix[-1], pushed[k], ring))
        suffix = [delta] * (d + 1)
        for k in range(d - 1, 0, -1):
            suffix[k] = _conv(pushed[k], suffix[k + 1], ring)
        for k, (e, c) in enumerate(zip(eids, coeffs)):
            excl = _conv(prefix[k], suffix[k + 1], ring)
            msg = [excl[ring._neg[ring._mul[a][c]]] for a in range(q)]
            down[e] = _normalized(msg) if state.normalize else msg
    return down


def check_update_bruteforce(code, up, j, i):
    """Direct enumeration of the downward message on edge ``(j, i)``."""
    import itertools
    ring = code.ring
    others = code.A(j, i)
    h = code.h
    zero = up[0][0] * 0
    out = [zero] * ring.q
    for a in range(ring.q):
        target = ring._neg[ring._mul[a][int(h[j, i])]]
        total = zero
        for ds in itertools.product(range(ring.q), repeat=len(others)):
            s = 0
            for l, dl in zip(others, ds):
                s = ring._add[s][ring._mul[dl][int(h[j, l])]]
            if s == target:
                prod = zero + 1
                for l, dl in zip(others, ds):
                    prod = prod * up[code.edge_id[(j, l)]][dl]
                total += prod
        out[a] = total
    return out


def iterate(code, state):
    state.up = variable_update(code, state)
    state.down = check_update(code, state)
    state.k += 1
    if state.history is not None:
        state.history.append((state.k, [list(m) for m in state.up], [list(m) for m in state.down]))
    return state


def decide(code, state, tie_tol=TIE_TOL):
    """Summaries ``g``, argmax decisions ``h`` (lowest index) and per-symbol tie flags."""
    q = code.ring.q
    g, h, tied = [], [], []
    for i in range(code.n):
        gi = list(state.priors[i])
        for j in code.col_supports[i]:
            d = state.down[code.edge_id[(j, i)]]
            gi = [gi[a] * d[a] for a in range(q)]
        top = max(gi)
        if isinstance(top, (int, Fraction)):
            best = [a for a in range(q) if gi[a] == top]
        else:
            best = [a for a in range(q) if gi[a] >= top * (1 - tie_tol)]
        g.append(gi)
        h.append(best[0])
        tied.append(len(best) > 1)
    return g, tuple(h), tuple(tied)


def run_sp(code, priors, max_iters, *, early_exit=True, normalize=None, record=False, tie_tol=TIE_TOL):
    if max_iters < 1:
        raise InvalidParameterError(f"need at least one iteration, got {max_iters}")
    state = init_from_priors(code, priors, normalize=normalize, record=record)
    return _run(code, state, max_iters, early_exit, tie_tol)


def _run(code, state, max_iters, early_exit, tie_tol):
    trace = []
    g = h = tied = None
    for _ in range(max_iters):
        iterate(code, state)
        g, h, tied = decide(code, state, tie_tol)
        ok = not any(tied) and code.is_codeword(h)
        trace.append(ok)
        if early_exit and ok:
            break
    if any(tied):
        status = "failure-tie"
    elif code.is_codeword(h):
        status = "codeword"
    else:
        status = "failure-noncodeword"
    return SpDecodeResult(status, h, state.k, trace, g, tied, state.history)


def decode_sp(code, channel, received, max_iters, *, early_exit=True, normalize=None,
              backend="prob", record=False, tie_tol=TIE_TOL):
    """Decode one received word.  ``backend="log"`` uses the vectorised log-domain decoder."""
    if max_iters < 1:
        raise InvalidParameterError(f"need at least one iteration, got {max_iters}")
    if backend == "log":
        from .sp_log import decode_batch
        ll = np.asarray(channel.log_likelihood_table(received), dtype=float)[None]
        out = decode_batch(code, ll, max_iters, early_exit=early_exit, tie_tol=tie_tol)
        return out.result(0)
    if backend != "prob":
        raise InvalidParameterError(f"unknown backend {backend!r}")
    state = init_messages(code, channel, received, normalize=normalize, record=record)
    return _run(code, state, max_iters, early_exit, tie_tol)


def error_event_sp(code, channel, received, transmitted, max_iters, **kw):
    res = decode_sp(code, channel, received, max_iters, **kw)
    return res.status == "failure-tie" or res.word != tuple(transmitted)


def dump_message_trace(code, history, path):
    """CSV with one row per iteration, edge and direction."""
    q = code.ring.q
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["k", "j", "i", "direction"] + [f"m{a}" for a in range(q)])
        for k, up, down in history:
            for e, (j, i) in enumerate(code.edges):
                wr.writerow([k, j, i, "U"] + [str(v) for v in up[e]])
                wr.writerow([k, j, i, "D"] + [str(v) for v in down[e]])


def symbol_posteriors(code, channel, received, codewords=None):
    """Brute-force ``p(c_i = a | y)`` (unnormalised) by summing over all codewords."""
    codewords = code.enumerate_codewords() if codewords is None else codewords
    q = code.ring.q
    lik = channel.likelihood_table(received)
    zero = lik[0][0] * 0
    post = [[zero] * q for _ in range(code.n)]
    for c in codewords:
        p = zero + 1
        for i, s in enumerate(c):
            p = p * lik[i][s]
        for i, s in enumerate(c):
            post[i][s] += p
    return post


def tree_diameter(code):
    """Longest shortest path (in edges) of the Tanner graph; ``math.inf`` if disconnected."""
    from collections import deque
    nodes = [("v", i) for i in range(code.n)] + [("c", j) for j in range(code.m)]
    adj = {v: [] for v in nodes}
    for j, i in code.edges:
        adj[("v", i)].append(("c", j))
        adj[("c", j)].append(("v", i))
    best = 0
    for s in nodes:
        dist = {s: 0}
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    dq.append(w)
        if len(dist) < len(nodes):
            return math.inf
        best = max(best, max(dist.values()))
    return best
