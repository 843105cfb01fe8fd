"""Memoryless channels over a ring alphabet.

Two families are provided:

* :class:`DiscreteChannel` with a finite output set given by a transition
  matrix.  Probabilities may be :class:`fractions.Fraction`, in which case
  likelihoods, SP messages and error probabilities stay exact.
* :class:`PskChannel`, the ring element ``a_k`` sent as the PSK point
  ``exp(2j*pi*k/q)`` through complex AWGN, optionally scaled by a known
  per-symbol fading gain.

Each channel carries the output bijections ``tau_beta`` used by the
codeword-independence argument: ``p(y|a) == p(tau_beta(y) | a - beta)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .codes import as_word
from .errors import (ConfigError, InvalidParameterError, PskIncompatibleError,
                     RingMismatchError, UndefinedLlrError)
from .rings import has_canonical_cyclic_labels, is_additively_cyclic

CLAMP = 1e30


def make_rng(seed, stream=0):
    """Counter-based generator keyed by ``(seed, stream)``.

    Distinct streams are statistically independent, so trial ``t`` of a run
    can be reproduced in isolation with ``make_rng(seed, t)``.
    """
    return np.random.Generator(np.random.Philox(key=[int(seed), int(stream)]))


def _is_exact(x):
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


class Channel:
    """Common interface; see the two concrete subclasses."""

    ring = None
    output_kind = None

    def likelihood(self, y, alpha, position=0):
        raise NotImplementedError

    def log_likelihood(self, y, alpha, position=0):
        raise NotImplementedError

    def tau(self, beta, y):
        raise NotImplementedError

    def sample(self, codeword, seed, stream=0):
        raise NotImplementedError

    @property
    def exact(self):
        return False

    def likelihood_table(self, received):
        """``n x q`` nested list of ``p(y_i | a)``."""
        return [[self.likelihood(y, a, i) for a in range(self.ring.q)] for i, y in enumerate(received)]

    def log_likelihood_table(self, received):
        return np.array([[self.log_likelihood(y, a, i) for a in range(self.ring.q)]
                         for i, y in enumerate(received)], dtype=float)


class DiscreteChannel(Channel):
    """Channel with outputs ``0 .. S-1`` and ``matrix[a][y] = p(y | a)``.

    ``tau`` may be given as one permutation of the outputs per ring element;
    when omitted, :meth:`symmetry_witness` searches for one.
    """

    output_kind = "discrete"

    def __init__(self, ring, matrix, *, tau=None, name="discrete", output_labels=None):
        rows = [list(r) for r in matrix]
        if len(rows) != ring.q:
            raise InvalidParameterError(f"transition matrix needs {ring.q} rows, got {len(rows)}")
        size = len(rows[0])
        if size < 1 or any(len(r) != size for r in rows):
            raise InvalidParameterError("transition matrix rows must have equal length")
        exact = all(_is_exact(p) for r in rows for p in r)
        if exact:
            rows = [[Fraction(p) for p in r] for r in rows]
        else:
            rows = [[float(p) for p in r] for r in rows]
        for a, r in enumerate(rows):
            if any(p < 0 for p in r):
                raise InvalidParameterError(f"negative probability in row {a}")
            total = sum(r)
            if (exact and total != 1) or (not exact and abs(total - 1.0) > 1e-12):
                raise InvalidParameterError(f"row {a} sums to {total}, not 1")
        self.ring = ring
        self.matrix = tuple(tuple(r) for r in rows)
        self.size = size
        self.name = name
        self.output_labels = tuple(output_labels) if output_labels else tuple(range(size))
        self._exact = exact
        self._tau = None
        self._witness = None
        if tau is not None:
            tau = [tuple(int(v) for v in perm) for perm in tau]
            if len(tau) != ring.q or any(sorted(p) != list(range(size)) for p in tau):
                raise InvalidParameterError("tau must give one permutation of the outputs per element")
            self._tau = tuple(tau)
        self._cum = np.cumsum(np.array([[float(p) for p in r] for r in rows]), axis=1)

    def __repr__(self):
        return f"DiscreteChannel({self.name!r}, q={self.ring.q}, outputs={self.size})"

    @property
    def exact(self):
        return self._exact

    def likelihood(self, y, alpha, position=0):
        return self.matrix[alpha][y]

    def log_likelihood(self, y, alpha, position=0):
        p = self.matrix[alpha][y]
        return math.log(p) if p > 0 else -math.inf

    def log_likelihood_table(self, received):
        with np.errstate(divide="ignore"):
            return np.log(np.array([[float(self.matrix[a][y]) for a in range(self.ring.q)]
                                    for y in received], dtype=float))

    def tau(self, beta, y):
        return self.symmetry_witness().maps[beta][y]

    def symmetry_witness(self):
        """Output permutations ``tau_beta``, explicit or found by column matching.

        A bijection for ``beta`` must send ``y`` to an output whose likelihood
        column is the column of ``y`` shifted by ``beta``.  Where no such
        bijection exists the identity is used and the miss is recorded in
        ``failures``, so :func:`verify_symmetry` reports it as a violation.
        """
        if self._witness is None:
            self._witness = self._find_witness()
        return self._witness

    def _find_witness(self):
        if self._tau is not None:
            return SymmetryWitness("permutation", {b: self._tau[b] for b in range(self.ring.q)})
        r = self.ring
        cols = [tuple(self.matrix[a][y] for a in range(r.q)) for y in range(self.size)]
        maps, failures = {}, {}
        for beta in range(r.q):
            pool = {}
            for y2, col in enumerate(cols):
                pool.setdefault(col, []).append(y2)
            perm = []
            for y, col in enumerate(cols):
                # want p(y2 | g) == p(y | g + beta) for every g
                target = tuple(col[r._add[g][beta]] for g in range(r.q))
                cands = pool.get(target)
                if not cands:
                    failures[beta] = y
                    perm = list(range(self.size))
                    break
                perm.append(cands.pop(0))
            maps[beta] = tuple(perm)
        return SymmetryWitness("permutation", maps, failures)

    def sample(self, codeword, seed, stream=0):
        c = as_word(codeword, self.ring)
        u = make_rng(seed, stream).random(len(c))
        out = [int(np.searchsorted(self._cum[a], x, side="right")) for a, x in zip(c, u)]
        return tuple(min(y, self.size - 1) for y in out)

    def sample_many(self, codeword, count, rng):
        """``count`` independent outputs for one codeword, shape ``(count, n)``."""
        c = as_word(codeword, self.ring)
        u = rng.random((count, len(c)))
        out = np.empty((count, len(c)), dtype=np.int64)
        for i, a in enumerate(c):
            out[:, i] = np.searchsorted(self._cum[a], u[:, i], side="right")
        return np.minimum(out, self.size - 1)


class PskChannel(Channel):
    """q-ary PSK over complex AWGN, with optional known flat-fading gains.

    ``sigma`` is the noise standard deviation per real dimension.  With
    ``gains`` set, position ``i`` of every received word is centred on
    ``gains[i] * M(a)``.
    """

    output_kind = "complex"

    def __init__(self, ring, sigma, *, gains=None, allow_noncyclic=False):
        if not sigma > 0:
            raise InvalidParameterError(f"sigma must be positive, got {sigma}")
        if not allow_noncyclic:
            check_psk_compatible(ring)
        self.ring = ring
        self.sigma = float(sigma)
        self.points = np.exp(2j * np.pi * np.arange(ring.q) / ring.q)
        self.gains = None if gains is None else np.asarray(gains, dtype=complex)
        self._log_norm = -math.log(2 * math.pi * self.sigma ** 2)

    def __repr__(self):
        kind = "fading" if self.gains is not None else "awgn"
        return f"PskChannel({kind}, q={self.ring.q}, sigma={self.sigma})"

    def _gain(self, position):
        return 1.0 if self.gains is None else self.gains[position]

    def _check_length(self, n):
        if self.gains is not None and n != len(self.gains):
            raise InvalidParameterError(f"fading channel has {len(self.gains)} gains, word has length {n}")

    def log_likelihood(self, y, alpha, position=0):
        d = y - self._gain(position) * self.points[alpha]
        return self._log_norm - (d.real ** 2 + d.imag ** 2) / (2 * self.sigma ** 2)

    def likelihood(self, y, alpha, position=0):
        return math.exp(self.log_likelihood(y, alpha, position))

    def log_likelihood_table(self, received):
        y = np.asarray(received, dtype=complex)
        self._check_length(len(y))
        g = np.ones(len(y)) if self.gains is None else self.gains
        d = y[:, None] - g[:, None] * self.points[None, :]
        return self._log_norm - np.abs(d) ** 2 / (2 * self.sigma ** 2)

    def likelihood_table(self, received):
        return np.exp(self.log_likelihood_table(received)).tolist()

    def rotation(self, beta):
        return np.exp(-2j * np.pi * beta / self.ring.q)

    def tau(self, beta, y):
        return self.rotation(beta) * y

    def symmetry_witness(self):
        return SymmetryWitness("rotation", {b: complex(self.rotation(b)) for b in range(self.ring.q)})

    def modulate(self, codeword):
        c = np.array(as_word(codeword, self.ring), dtype=np.int64)
        self._check_length(len(c))
        g = np.ones(len(c)) if self.gains is None else self.gains
        return g * self.points[c]

    def sample(self, codeword, seed, stream=0):
        x = self.modulate(codeword)
        z = make_rng(seed, stream).standard_normal((2, len(x)))
        return x + self.sigma * (z[0] + 1j * z[1])

    def sample_many(self, codeword, count, rng):
        x = self.modulate(codeword)
        z = rng.standard_normal((count, 2, len(x)))
        return x[None, :] + self.sigma * (z[:, 0] + 1j * z[:, 1])


@dataclass
class SymmetryWitness:
    kind: str
    maps: dict
    failures: dict = field(default_factory=dict)


def check_psk_compatible(ring):
    cyclic, _ = is_additively_cyclic(ring)
    if not cyclic:
        orders = sorted({ring.additive_order(a) for a in range(1, ring.q)})
        raise PskIncompatibleError(
            f"{ring.name}: additive group is not cyclic (element orders {orders}, none equal q={ring.q}); "
            "PSK labelling needs a_k + a_l = a_(k+l mod q)")
    if not has_canonical_cyclic_labels(ring):
        raise PskIncompatibleError(
            f"{ring.name}: additive group is cyclic but element indices do not follow "
            "a_k + a_l = a_(k+l mod q); relabel the ring first")


def qsc_channel(ring, p_err):
    """q-ary symmetric channel: keep the symbol w.p. ``1 - p_err``."""
    exact = _is_exact(p_err) or isinstance(p_err, str)
    p = Fraction(p_err) if exact else float(p_err)
    if not 0 <= p < 1:
        raise InvalidParameterError(f"p_err must lie in [0, 1), got {p_err}")
    q = ring.q
    off = p / (q - 1)
    matrix = [[1 - p if y == a else off for y in range(q)] for a in range(q)]
    tau = [[ring._add[y][ring._neg[b]] for y in range(q)] for b in range(q)]
    return DiscreteChannel(ring, matrix, tau=tau, name=f"qsc({p})")


def psk_awgn_channel(ring, sigma, *, allow_noncyclic=False):
    """PSK over AWGN. ``allow_noncyclic`` builds deliberately broken labellings for tests."""
    return PskChannel(ring, sigma, allow_noncyclic=allow_noncyclic)


def rayleigh_gains(n, seed):
    z = make_rng(seed, 2 ** 32).standard_normal((2, n))
    return (z[0] + 1j * z[1]) / math.sqrt(2)


def psk_fading_channel(ring, sigma, gains=None, *, n=None, seed=0, fade_coefficient_known=True):
    """PSK over flat fading with coherent detection.

    Either pass the ``gains`` explicitly or give ``n`` and ``seed`` to draw
    Rayleigh gains.
    """
    if not fade_coefficient_known:
        raise InvalidParameterError("only coherent detection with known fading gains is supported")
    if gains is None:
        if n is None:
            raise InvalidParameterError("need gains or a block length n")
        gains = rayleigh_gains(n, seed)
    return PskChannel(ring, sigma, gains=gains)


def _log2_exact(ratio):
    num, den = ratio.numerator, ratio.denominator
    if num & (num - 1) or den & (den - 1):
        raise InvalidParameterError(f"likelihood ratio {ratio} is not a power of two; no exact base-2 LLR")
    return Fraction(num.bit_length() - den.bit_length())


def compute_llr(channel, received, *, base2=False, clamp=CLAMP, on_undefined="raise"):
    """Cost vector ``log p(y_i|0) / p(y_i|a)`` as an ``(n, q-1)`` array.

    Entries whose numerator or denominator probability vanishes are clamped
    to ``+-clamp``.  When both vanish the ratio is undefined:
    ``on_undefined="raise"`` raises :class:`UndefinedLlrError`, while
    ``"floor"`` treats ``log 0`` as ``-clamp`` and so yields 0 there (this is
    what makes zero-noise channels decodable for nonzero codewords).

    With ``base2=True`` on an exact discrete channel whose likelihood ratios
    are powers of two the result is an object array of integer-valued
    Fractions, suitable for the exact LP backend.
    """
    if on_undefined not in ("raise", "floor"):
        raise InvalidParameterError(f"on_undefined must be 'raise' or 'floor', got {on_undefined!r}")
    q = channel.ring.q
    n = len(received)
    if base2 and channel.exact:
        out = np.empty((n, q - 1), dtype=object)
        big = Fraction(int(clamp))
        for i, y in enumerate(received):
            p0 = channel.likelihood(y, 0, i)
            for a in range(1, q):
                pa = channel.likelihood(y, a, i)
                if p0 == 0 and pa == 0:
                    if on_undefined == "raise":
                        raise UndefinedLlrError(f"p(y_{i}|0) = p(y_{i}|{a}) = 0")
                    out[i, a - 1] = Fraction(0)
                elif pa == 0:
                    out[i, a - 1] = big
                elif p0 == 0:
                    out[i, a - 1] = -big
                else:
                    out[i, a - 1] = _log2_exact(Fraction(p0) / Fraction(pa))
        return out
    ll = channel.log_likelihood_table(received)
    zero_dead = np.isneginf(ll[:, :1])
    dead = np.isneginf(ll[:, 1:])
    both = zero_dead & dead
    if np.any(both) and on_undefined == "raise":
        i, a = np.argwhere(both)[0]
        raise UndefinedLlrError(f"p(y_{i}|0) = p(y_{i}|{a + 1}) = 0")
    with np.errstate(invalid="ignore"):
        lam = ll[:, :1] - ll[:, 1:]
    lam = np.where(dead, clamp, lam)
    lam = np.where(zero_dead & ~dead, -clamp, lam)
    lam = np.where(both, 0.0, lam)
    if base2:
        lam = np.where(np.abs(lam) >= clamp, lam, lam / math.log(2))
    return lam


def _as_indices(ring, codeword):
    if any(hasattr(s, "ring") and s.ring != ring for s in codeword):
        raise RingMismatchError("codeword symbols belong to a different ring than the channel")
    return as_word(codeword, ring)


def apply_g_transform(channel, codeword, received):
    """Apply ``tau_{c_i}`` to each received symbol."""
    c = _as_indices(channel.ring, codeword)
    if len(c) != len(received):
        raise InvalidParameterError("codeword and received word differ in length")
    if channel.output_kind == "complex":
        rot = np.array([channel.rotation(b) for b in c])
        return rot * np.asarray(received, dtype=complex)
    w = channel.symmetry_witness()
    return tuple(w.maps[b][y] for b, y in zip(c, received))


@dataclass
class SymmetryReport:
    channel: str
    exhaustive: bool
    checked: int
    symmetric: bool
    composition: bool
    max_deviation: float
    violations: list

    @property
    def passed(self):
        return self.symmetric and self.composition


def verify_symmetry(channel, trials=10_000, *, seed=0, tol=1e-12, max_witnesses=10):
    """Check ``p(y|a) = p(tau_b(y)|a-b)`` and ``tau_{a+b} = tau_a o tau_b``.

    Discrete channels are checked exhaustively (exactly when their
    probabilities are rational); PSK channels on ``trials`` random
    ``(y, a, b, position)`` draws with relative tolerance ``tol``.
    """
    r = channel.ring
    violations = []
    symmetric = composition = True
    worst = 0.0
    checked = 0
    if channel.output_kind == "discrete":
        w = channel.symmetry_witness()
        for beta, y in w.failures.items():
            symmetric = False
            violations.append({"law": "bijection", "beta": beta, "y": y})
        for y in range(channel.size):
            for a in range(r.q):
                for b in range(r.q):
                    checked += 1
                    lhs = channel.likelihood(y, a)
                    rhs = channel.likelihood(w.maps[b][y], r._add[a][r._neg[b]])
                    dev = abs(float(lhs - rhs))
                    worst = max(worst, dev)
                    if (lhs != rhs) if channel.exact else dev > tol:
                        symmetric = False
                        if len(violations) < max_witnesses:
                            violations.append({"law": "symmetry", "y": y, "alpha": a, "beta": b,
                                               "lhs": str(lhs), "rhs": str(rhs)})
                    ab = r._add[a][b]
                    if w.maps[ab][y] != w.maps[a][w.maps[b][y]]:
                        composition = False
                        if len(violations) < max_witnesses:
                            violations.append({"law": "composition", "y": y, "alpha": a, "beta": b})
        return SymmetryReport(repr(channel), True, checked, symmetric, composition, worst, violations)

    rng = make_rng(seed, 0)
    n_pos = 1 if channel.gains is None else len(channel.gains)
    for t in range(trials):
        a, b = (int(v) for v in rng.integers(0, r.q, size=2))
        pos = int(rng.integers(0, n_pos))
        centre = channel._gain(pos) * channel.points[int(rng.integers(0, r.q))]
        y = complex(centre + 2 * channel.sigma * (rng.standard_normal() + 1j * rng.standard_normal()))
        lhs = channel.likelihood(y, a, pos)
        rhs = channel.likelihood(channel.tau(b, y), r._add[a][r._neg[b]], pos)
        dev = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
        worst = max(worst, dev)
        checked += 1
        if dev > tol:
            symmetric = False
            if len(violations) < max_witnesses:
                violations.append({"law": "symmetry", "y": y, "alpha": a, "beta": b, "lhs": lhs, "rhs": rhs})
        comp = abs(channel.tau(r._add[a][b], y) - channel.tau(a, channel.tau(b, y)))
        if comp > tol * max(1.0, abs(y)):
            composition = False
            if len(violations) < max_witnesses:
                violations.append({"law": "composition", "y": y, "alpha": a, "beta": b})
    return SymmetryReport(repr(channel), False, checked, symmetric, composition, worst, violations)


# -- text formats ---------------------------------------------------------------

def read_discrete_channel(path, ring):
    """Read ``channel q S`` followed by q rows of S probabilities (fractions allowed)."""
    lines = [ln.split() for ln in Path(path).read_text().splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    head = lines[0]
    if len(head) != 3 or head[0] != "channel":
        raise InvalidParameterError(f"{path}: first line must be 'channel q S'")
    q, size = int(head[1]), int(head[2])
    if q != ring.q:
        raise InvalidParameterError(f"{path}: channel declares q={q}, ring has {ring.q}")
    rows = [[Fraction(v) for v in row] for row in lines[1:1 + q]]
    if len(rows) != q or any(len(r) != size for r in rows):
        raise InvalidParameterError(f"{path}: expected {q} rows of {size} probabilities")
    return DiscreteChannel(ring, rows, name=Path(path).stem)


_SPEC = re.compile(r"^\s*(\w+)\s*\((.*)\)\s*$")


def parse_channel_spec(spec, ring, n=None, base_dir="."):
    """Build a channel from ``qsc(p)``, ``awgn_psk(sigma)``, ``fading_psk(sigma, seed)``
    or ``discrete(path)``."""
    m = _SPEC.match(spec)
    if not m:
        raise ConfigError(f"cannot parse channel spec {spec!r}")
    kind, args = m.group(1), [a.strip() for a in m.group(2).split(",") if a.strip()]
    try:
        if kind == "qsc" and len(args) == 1:
            p = args[0]
            return qsc_channel(ring, Fraction(p) if re.fullmatch(r"[0-9/]+", p) else float(p))
        if kind == "awgn_psk" and len(args) == 1:
            return psk_awgn_channel(ring, float(args[0]))
        if kind == "fading_psk" and len(args) == 2:
            if n is None:
                raise ConfigError("fading_psk needs the code length")
            return psk_fading_channel(ring, float(args[0]), n=n, seed=int(args[1]))
        if kind == "discrete" and len(args) == 1:
            return read_discrete_channel(Path(base_dir) / args[0], ring)
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad channel spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown channel spec {spec!r}")


def write_received(path, received):
    rows = []
    if isinstance(received, np.ndarray) and np.iscomplexobj(received):
        rows.append("index,real,imag")
        rows += [f"{i},{float(y.real)!r},{float(y.imag)!r}" for i, y in enumerate(received)]
    else:
        rows.append("index,symbol")
        rows += [f"{i},{int(y)}" for i, y in enumerate(received)]
    Path(path).write_text("\n".join(rows) + "\n")


def read_received(path):
    lines = Path(path).read_text().split()
    head = lines[0].strip().split(",")
    body = [ln.split(",") for ln in lines[1:]]
    if head == ["index", "real", "imag"]:
        return np.array([complex(float(r), float(im)) for _, r, im in body])
    if head == ["index", "symbol"]:
        return tuple(int(s) for _, s in body)
    raise InvalidParameterError(f"{path}: unknown received-word header {head}")
