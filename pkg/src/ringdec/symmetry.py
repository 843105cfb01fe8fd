"""Instance-level checks of the codeword-shift argument.

For a codeword ``c`` the received-word map ``G`` (apply ``tau_{c_i}`` to
each symbol) pairs every outcome under ``c`` with one under the all-zero
codeword.  The functions here verify, on concrete inputs, the ingredients
that make the pairing preserve decoding errors:

* :func:`l_map` / :func:`l_map_inverse`: the polytope bijection carrying an
  LP point analysed for ``c`` to one analysed for ``0``;
* :func:`lambda_relation`: how LLRs of ``y`` and ``G(y)`` relate;
* :func:`cost_identity`: relative LP cost is preserved by the map;
* :func:`sp_equivariance`: every SP message computed from ``y`` equals the
  message from ``G(y)`` with its argument shifted by ``c_i``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .channels import apply_g_transform, make_rng
from .codes import embed
from .errors import InvalidParameterError
from .lp import build_polytope
from .sp import init_messages, iterate, decide

FLOAT_TOL = 1e-10


@dataclass
class PolytopePoint:
    f: np.ndarray           # (n, q-1), object dtype (Fractions or floats)
    w: list                 # w[j][k] in codebook order

    def flat(self, instance):
        return instance.join(self.f, self.w)


@dataclass
class CheckReport:
    name: str
    passed: bool
    checked: int
    max_residual: float
    witness: dict = field(default_factory=dict)

    def to_text(self):
        d = asdict(self)
        d["status"] = "PASS" if self.passed else "FAIL"
        return json.dumps(d, default=str, sort_keys=True)


def lift_point(code, word, instance=None):
    inst = instance or build_polytope(code)
    f, w = inst.lift(word)
    return PolytopePoint(np.array(f, dtype=object), [list(wj) for wj in w])


def random_feasible_point(code, rng, *, codewords=None, max_terms=5, exact=True):
    """Random convex combination of up to ``max_terms`` codeword lifts."""
    if isinstance(rng, (int, np.integer)):
        rng = make_rng(rng)
    codewords = code.enumerate_codewords() if codewords is None else codewords
    k = int(rng.integers(1, max_terms + 1))
    picks = [codewords[int(t)] for t in rng.integers(0, len(codewords), size=k)]
    if exact:
        raw = [int(v) for v in rng.integers(1, 100, size=k)]
        weights = [Fraction(v, sum(raw)) for v in raw]
        zero = Fraction(0)
    else:
        weights = list(rng.dirichlet(np.ones(k)))
        zero = 0.0
    inst = build_polytope(code)
    f = np.full((code.n, code.ring.q - 1), zero, dtype=object)
    w = [[zero] * len(b) for b in code.spc_books]
    for lam, c in zip(weights, picks):
        fc, wc = inst.lift(c)
        f = f + lam * np.array(fc, dtype=object)
        for j in range(code.m):
            for kk, v in enumerate(wc[j]):
                if v:
                    w[j][kk] += lam
    return PolytopePoint(f, w)


def polytope_residual(code, point, instance=None):
    inst = instance or build_polytope(code)
    return inst.residuals(point.flat(inst))


def _require_member(code, point, tol):
    res = polytope_residual(code, point)
    if res > tol:
        raise InvalidParameterError(f"point is not in the polytope (residual {res})")


def l_map(code, c, point, *, tol=0):
    """Image of ``point`` under the shift by codeword ``c``.

    ``f~[i, a] = 1 - sum(f[i])`` when ``a == -c_i`` and ``f[i, a + c_i]``
    otherwise; ``w~[j, r] = w[j, r + x_j(c)]``.
    """
    _require_member(code, point, tol)
    r = code.ring
    q = r.q
    f = point.f
    ft = np.empty_like(f)
    for i in range(code.n):
        b = c[i]
        total = sum(f[i])
        for a in range(1, q):
            if a == r._neg[b]:
                ft[i, a - 1] = 1 - total
            else:
                ft[i, a - 1] = f[i, r._add[a][b] - 1]
    wt = []
    for j, book in enumerate(code.spc_books):
        xc = code.project(j, c)
        idx = code.spc_index[j]
        wt.append([point.w[j][idx[tuple(r._add[s][t] for s, t in zip(rr, xc))]] for rr in book])
    return PolytopePoint(ft, wt)


def l_map_inverse(code, c, point, *, tol=0):
    _require_member(code, point, tol)
    r = code.ring
    q = r.q
    ft = point.f
    f = np.empty_like(ft)
    for i in range(code.n):
        b = c[i]
        total = sum(ft[i])
        for a in range(1, q):
            if a == b:
                f[i, a - 1] = 1 - total
            else:
                f[i, a - 1] = ft[i, r._add[a][r._neg[b]] - 1]
    w = []
    for j, book in enumerate(code.spc_books):
        xc = code.project(j, c)
        idx = code.spc_index[j]
        w.append([point.w[j][idx[tuple(r._add[s][r._neg[t]] for s, t in zip(bb, xc))]] for bb in book])
    return PolytopePoint(f, w)


def point_deviation(p1, p2):
    dev = max(abs(a - b) for a, b in zip(p1.f.reshape(-1), p2.f.reshape(-1)))
    for w1, w2 in zip(p1.w, p2.w):
        dev = max([dev] + [abs(a - b) for a, b in zip(w1, w2)])
    return dev


def _lam(llr, i, a):
    return 0 if a == 0 else llr[i, a - 1]


def lambda_relation(code, c, llr, llr_tilde, *, tol=None):
    """Check the three-case relation between the LLRs of ``y`` and ``G(c, y)``.

    With ``b = c_i``: ``lam[i,a]`` equals ``lt[i,a]`` if ``b == 0``,
    ``-lt[i,-a]`` if ``a == b`` and ``lt[i,a-b] - lt[i,-b]`` otherwise.
    ``tol=None`` means exact comparison for object arrays and relative
    :data:`FLOAT_TOL` for floats.
    """
    r = code.ring
    llr, llr_tilde = np.asarray(llr), np.asarray(llr_tilde)
    exact = llr.dtype == object and tol is None
    tol = FLOAT_TOL if tol is None else tol
    worst, witness, checked, ok = 0.0, {}, 0, True
    for i in range(code.n):
        b = c[i]
        for a in range(1, r.q):
            if b == 0:
                expect = _lam(llr_tilde, i, a)
            elif a == b:
                expect = -_lam(llr_tilde, i, r._neg[a])
            else:
                expect = _lam(llr_tilde, i, r._add[a][r._neg[b]]) - _lam(llr_tilde, i, r._neg[b])
            got = llr[i, a - 1]
            checked += 1
            if exact:
                dev = abs(got - expect)
                bad = dev != 0
            else:
                dev = abs(float(got) - float(expect)) / max(1.0, abs(float(got)))
                bad = dev > tol
            if float(dev) > worst or (bad and not witness):
                worst = float(dev)
                witness = {"i": i, "alpha": a, "beta": b, "lambda": got, "expected": expect}
            ok &= not bad
    return CheckReport("lambda_relation", ok, checked, worst, witness)


def _dot(llr, f):
    return sum(l * v for l, v in zip(np.asarray(llr).reshape(-1), np.asarray(f).reshape(-1)))


def cost_identity(code, c, llr, llr_tilde, point, image):
    """Residual of ``lam.f - lam.E(c) = lt.f~ - lt.E(0)`` plus its per-symbol parts."""
    q = code.ring.q
    ec = embed(c, q)
    per_symbol = []
    for i in range(code.n):
        lhs = _dot(llr[i], point.f[i]) - _dot(llr[i], ec[i])
        rhs = _dot(llr_tilde[i], image.f[i])
        per_symbol.append(abs(lhs - rhs))
    lhs = _dot(llr, point.f) - _dot(llr, ec)
    rhs = _dot(llr_tilde, image.f)
    return abs(lhs - rhs), per_symbol


def error_predicate(code, c, llr, point, tol=0):
    """``f != E(c)`` and ``lam.f <= lam.E(c)`` for a polytope point."""
    ec = embed(c, code.ring.q)
    differs = any(abs(a - b) > tol for a, b in zip(point.f.reshape(-1), ec.reshape(-1)))
    return differs and _dot(llr, point.f) <= _dot(llr, ec) + tol


def sp_equivariance(code, channel, received, c, max_iters, *, tol=None):
    """Run SP on ``y`` and ``G(c, y)`` and compare every message after the shift.

    Checks ``m[j,i](a) == m~[j,i](a - c_i)`` for upward and downward messages
    at each iteration ``k <= max_iters``, and the same for the summaries.
    Exact when the channel is exact (normalisation is then off).
    """
    r = code.ring
    yt = apply_g_transform(channel, c, received)
    s = init_messages(code, channel, received, record=True)
    st = init_messages(code, channel, yt, record=True)
    exact = channel.exact and tol is None
    tol = FLOAT_TOL if tol is None else tol
    worst, witness, checked, ok = 0.0, {}, 0, True

    def compare(kind, k, e, i, m, mt):
        nonlocal worst, witness, checked, ok
        for a in range(r.q):
            x, xt = m[a], mt[r._add[a][r._neg[c[i]]]]
            checked += 1
            dev = abs(x - xt) if exact else abs(float(x) - float(xt)) / max(abs(float(x)), 1e-300)
            bad = dev != 0 if exact else dev > tol
            if float(dev) > worst or (bad and not witness):
                worst = float(dev)
                witness = {"kind": kind, "k": k, "edge": e, "alpha": a, "value": x, "shifted": xt}
            ok &= not bad

    for e, (j, i) in enumerate(code.edges):
        compare("down", 0, code.edges[e], i, s.down[e], st.down[e])
    for _ in range(max_iters):
        iterate(code, s)
        iterate(code, st)
        for e, (j, i) in enumerate(code.edges):
            compare("up", s.k, (j, i), i, s.up[e], st.up[e])
            compare("down", s.k, (j, i), i, s.down[e], st.down[e])
    g, h, tied = decide(code, s)
    gt, ht, tiedt = decide(code, st)
    for i in range(code.n):
        compare("summary", s.k, None, i, g[i], gt[i])
    shifted = tuple(r._add[a][r._neg[b]] for a, b in zip(h, c))
    if not any(tied) and shifted != ht:
        ok = False
        witness = witness or {"kind": "decision", "h": h, "h_tilde": ht}
    return CheckReport("sp_equivariance", ok, checked, worst, witness)


def g_isometry(channel, c, y, z):
    """``|G(y) - G(z)|^2 - |y - z|^2`` for complex outputs (should vanish)."""
    gy = apply_g_transform(channel, c, y)
    gz = apply_g_transform(channel, c, z)
    y, z = np.asarray(y, dtype=complex), np.asarray(z, dtype=complex)
    return float(np.sum(np.abs(gy - gz) ** 2) - np.sum(np.abs(y - z) ** 2))
