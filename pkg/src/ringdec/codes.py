"""Linear codes over a finite ring defined by a parity-check matrix.

Words are tuples of element indices.  Column and row indices are 0-based
throughout, so ``row_supports[j]`` is the sorted tuple of columns ``i``
with ``H[j, i] != 0``.
"""

from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np

from .errors import EnumerationBoundError, InvalidParameterError, NotIntegralError
from .rings import Ring, RingElement, make_cyclic_ring, read_ring_file

CODEWORD_ENUM_BOUND = 2 ** 20
SPC_ENUM_BOUND = 10 ** 6


def as_word(word, ring, n=None):
    """Coerce a sequence of indices or :class:`RingElement` to a tuple of ints."""
    out = []
    for s in word:
        if isinstance(s, RingElement):
            out.append(ring._unwrap(s)[1][0])
        else:
            s = int(s)
            if not 0 <= s < ring.q:
                raise InvalidParameterError(f"symbol {s} outside [0, {ring.q})")
            out.append(s)
    if n is not None and len(out) != n:
        raise InvalidParameterError(f"word has length {len(out)}, expected {n}")
    return tuple(out)


class Code:
    """Parity-check code ``{c : c H^T = 0}`` with precomputed local codebooks."""

    def __init__(self, ring: Ring, h, *, spc_bound=SPC_ENUM_BOUND):
        h = np.array(h, dtype=np.int64)
        if h.ndim != 2:
            raise InvalidParameterError("parity-check matrix must be 2-D")
        if h.size and (h.min() < 0 or h.max() >= ring.q):
            raise InvalidParameterError("parity-check entries must be ring indices")
        h.setflags(write=False)
        self.ring = ring
        self.h = h
        self.m, self.n = h.shape
        self.row_supports = tuple(tuple(int(i) for i in np.flatnonzero(h[j])) for j in range(self.m))
        self.col_supports = tuple(tuple(int(j) for j in np.flatnonzero(h[:, i])) for i in range(self.n))
        total = sum(ring.q ** len(s) for s in self.row_supports)
        if total > spc_bound:
            raise EnumerationBoundError("local codebook enumeration", total, spc_bound)
        self.spc_books = tuple(self._enumerate_spc(j) for j in range(self.m))
        self.spc_index = tuple({b: k for k, b in enumerate(book)} for book in self.spc_books)
        # edges in row-major order; the message-passing decoders index by edge id
        self.edges = tuple((j, i) for j in range(self.m) for i in self.row_supports[j])
        self.edge_id = {e: k for k, e in enumerate(self.edges)}

    def __repr__(self):
        return f"Code(ring={self.ring.name}, m={self.m}, n={self.n})"

    def A(self, j, i):
        """Other variables in check ``j``."""
        return tuple(l for l in self.row_supports[j] if l != i)

    def D(self, j, i):
        """Other checks on variable ``i``."""
        return tuple(l for l in self.col_supports[i] if l != j)

    def _row_syndrome(self, j, local):
        r = self.ring
        s = 0
        for i, b in zip(self.row_supports[j], local):
            s = r._add[s][r._mul[b][int(self.h[j, i])]]
        return s

    def _enumerate_spc(self, j):
        supp = self.row_supports[j]
        return tuple(b for b in itertools.product(range(self.ring.q), repeat=len(supp))
                     if self._row_syndrome(j, b) == 0)

    def _check_row(self, j):
        if not 0 <= j < self.m:
            raise InvalidParameterError(f"check index {j} outside [0, {self.m})")

    def check_satisfied(self, j, word):
        self._check_row(j)
        word = as_word(word, self.ring, self.n)
        return self._row_syndrome(j, self.project(j, word)) == 0

    def enumerate_spc(self, j):
        self._check_row(j)
        return list(self.spc_books[j])

    def project(self, j, word):
        return tuple(word[i] for i in self.row_supports[j])

    def syndrome(self, word):
        word = as_word(word, self.ring, self.n)
        return tuple(self._row_syndrome(j, self.project(j, word)) for j in range(self.m))

    def is_codeword(self, word):
        word = as_word(word, self.ring, self.n)
        return all(self._row_syndrome(j, self.project(j, word)) == 0 for j in range(self.m))

    def zero_word(self):
        return (0,) * self.n

    def add_words(self, u, v):
        return tuple(self.ring._add[a][b] for a, b in zip(u, v))

    def sub_words(self, u, v):
        return tuple(self.ring._add[a][self.ring._neg[b]] for a, b in zip(u, v))

    def enumerate_codewords(self, bound=CODEWORD_ENUM_BOUND):
        """All codewords, in lexicographic order of their symbol indices."""
        size = self.ring.q ** self.n
        if size > bound:
            raise EnumerationBoundError("codeword enumeration", size, bound)
        r = self.ring
        words = np.indices((r.q,) * self.n).reshape(self.n, -1).T
        ok = np.ones(len(words), dtype=bool)
        for j in range(self.m):
            s = np.zeros(len(words), dtype=np.int64)
            for i in self.row_supports[j]:
                s = r.add_table[s, r.mul_table[words[:, i], self.h[j, i]]]
            ok &= s == 0
        return [tuple(int(v) for v in w) for w in words[ok]]


def embed(word, q):
    """Indicator embedding: one block of ``q-1`` entries per symbol.

    Returned as an ``(n, q-1)`` integer array; column ``a-1`` of row ``i``
    is 1 exactly when symbol ``i`` equals the nonzero element ``a``.
    """
    word = [int(s) for s in word]
    f = np.zeros((len(word), q - 1), dtype=np.int64)
    for i, s in enumerate(word):
        if s:
            f[i, s - 1] = 1
    return f


def unembed(f):
    """Inverse of :func:`embed`; every block must be 0/1 with weight at most 1."""
    f = np.asarray(f)
    out = []
    for i, block in enumerate(f):
        ones = [k for k, v in enumerate(block) if v == 1]
        if any(v != 0 and v != 1 for v in block) or len(ones) > 1:
            raise NotIntegralError(f"block {i} is not an indicator vector: {list(block)}")
        out.append(ones[0] + 1 if ones else 0)
    return tuple(out)


def read_pcm_file(path, ring=None):
    """Read ``pcm q m n`` followed by ``m`` rows of ``n`` indices.

    Without an explicit ``ring`` the integers modulo ``q`` are used.
    """
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    head = lines[0]
    if len(head) != 4 or head[0] != "pcm":
        raise InvalidParameterError(f"{path}: first line must be 'pcm q m n'")
    q, m, n = (int(v) for v in head[1:])
    rows = [[int(v) for v in row] for row in lines[1:1 + m]]
    if len(rows) != m or any(len(r) != n for r in rows):
        raise InvalidParameterError(f"{path}: expected {m} rows of {n} entries")
    if ring is None:
        ring = make_cyclic_ring(q)
    elif isinstance(ring, (str, Path)):
        ring = read_ring_file(ring)
    if ring.q != q:
        raise InvalidParameterError(f"{path}: matrix declares q={q} but ring has {ring.q} elements")
    return Code(ring, rows)


def write_pcm_file(code, path):
    rows = [f"pcm {code.ring.q} {code.m} {code.n}"]
    rows += [" ".join(str(int(v)) for v in r) for r in code.h]
    Path(path).write_text("\n".join(rows) + "\n")
