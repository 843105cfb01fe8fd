"""Finite rings given by exhaustive addition and multiplication tables.

Elements are integer indices ``0 .. q-1`` into the tables, and index 0 is
always the additive identity.  For the cyclic rings built by
:func:`make_cyclic_ring` the index of an element is also its residue, so
``a_k + a_l = a_{(k + l) mod q}`` can be read directly off the indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError, RingAxiomError, RingMismatchError

MAX_RING_SIZE = 64


def _first_mismatch(lhs, rhs):
    bad = np.argwhere(lhs != rhs)
    return None if len(bad) == 0 else tuple(int(v) for v in bad[0])


def validate_tables(add, mul):
    """Raise :class:`RingAxiomError` unless ``add``/``mul`` define a ring.

    Every axiom is checked exhaustively over all pairs and triples.
    """
    q = add.shape[0]
    idx = np.arange(q)
    if not (np.array_equal(add[0], idx) and np.array_equal(add[:, 0], idx)):
        ids = [e for e in range(q) if np.array_equal(add[e], idx) and np.array_equal(add[:, e], idx)]
        raise RingAxiomError("a_0 must be the additive identity", ids[:1] or (0,))
    w = _first_mismatch(add, add.T)
    if w is not None:
        raise RingAxiomError("addition is not commutative", w)
    a, b, c = idx[:, None, None], idx[None, :, None], idx[None, None, :]
    w = _first_mismatch(add[add[a, b], c], add[a, add[b, c]])
    if w is not None:
        raise RingAxiomError("addition is not associative", w)
    for x in range(q):
        if not np.any(add[x] == 0):
            raise RingAxiomError("element has no additive inverse", (x,))
    w = _first_mismatch(mul[mul[a, b], c], mul[a, mul[b, c]])
    if w is not None:
        raise RingAxiomError("multiplication is not associative", w)
    w = _first_mismatch(mul[a, add[b, c]], add[mul[a, b], mul[a, c]])
    if w is not None:
        raise RingAxiomError("left distributivity fails", w)
    w = _first_mismatch(mul[add[a, b], c], add[mul[a, c], mul[b, c]])
    if w is not None:
        raise RingAxiomError("right distributivity fails", w)
    for x in range(q):
        if mul[0, x] != 0 or mul[x, 0] != 0:
            raise RingAxiomError("zero is not absorbing", (x,))


class Ring:
    """Immutable finite ring of ``q`` elements.

    The arithmetic methods accept plain indices (returning indices) or
    :class:`RingElement` values (returning elements, after checking that
    both operands belong to this ring).
    """

    def __init__(self, add_table, mul_table, *, labels=None, name=None,
                 max_q=MAX_RING_SIZE, validate=True):
        add = np.array(add_table, dtype=np.int64)
        mul = np.array(mul_table, dtype=np.int64)
        if add.ndim != 2 or add.shape[0] != add.shape[1] or add.shape != mul.shape:
            raise InvalidParameterError("ring tables must both be q x q")
        q = add.shape[0]
        if q < 2:
            raise InvalidParameterError(f"ring needs at least 2 elements, got q={q}")
        if q > max_q:
            raise InvalidParameterError(f"ring size {q} exceeds cap {max_q}")
        if add.min() < 0 or add.max() >= q or mul.min() < 0 or mul.max() >= q:
            raise InvalidParameterError("table entries must lie in [0, q)")
        if validate:
            validate_tables(add, mul)
        add.setflags(write=False)
        mul.setflags(write=False)
        self.q = q
        self.add_table = add
        self.mul_table = mul
        self.name = name or f"ring{q}"
        self.element_labels = tuple(labels) if labels is not None else tuple(f"a_{k}" for k in range(q))
        if len(self.element_labels) != q:
            raise InvalidParameterError("need one label per element")
        self.zero = 0
        neg = np.array([int(np.flatnonzero(add[x] == 0)[0]) for x in range(q)], dtype=np.int64)
        neg.setflags(write=False)
        self.neg_table = neg
        sub = add[:, neg]
        sub.setflags(write=False)
        self.sub_table = sub
        # nested tuples for fast scalar lookups in the pure-python decoders
        self._add = tuple(tuple(int(v) for v in row) for row in add)
        self._mul = tuple(tuple(int(v) for v in row) for row in mul)
        self._neg = tuple(int(v) for v in neg)
        self._key = (q, add.tobytes(), mul.tobytes())

    # identity is by value so two separately built copies of Z_q interoperate
    def __eq__(self, other):
        return isinstance(other, Ring) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Ring(name={self.name!r}, q={self.q})"

    @property
    def nonzero(self):
        """Indices of R minus the additive identity, in increasing order."""
        return range(1, self.q)

    def element(self, k):
        if not 0 <= k < self.q:
            raise InvalidParameterError(f"element index {k} outside [0, {self.q})")
        return RingElement(self, int(k))

    def elements(self):
        return [RingElement(self, k) for k in range(self.q)]

    def _unwrap(self, *xs):
        wrapped = False
        out = []
        for x in xs:
            if isinstance(x, RingElement):
                if x.ring != self:
                    raise RingMismatchError(f"element of {x.ring!r} used with {self!r}")
                wrapped = True
                out.append(x.index)
            else:
                out.append(x)
        return wrapped, out

    def _wrap(self, wrapped, k):
        return RingElement(self, k) if wrapped else k

    def add(self, a, b):
        w, (a, b) = self._unwrap(a, b)
        return self._wrap(w, self._add[a][b])

    def mul(self, a, b):
        w, (a, b) = self._unwrap(a, b)
        return self._wrap(w, self._mul[a][b])

    def neg(self, a):
        w, (a,) = self._unwrap(a)
        return self._wrap(w, self._neg[a])

    def sub(self, a, b):
        w, (a, b) = self._unwrap(a, b)
        return self._wrap(w, self._add[a][self._neg[b]])

    def additive_order(self, a):
        _, (a,) = self._unwrap(a)
        k, x = 1, a
        while x != 0:
            x = self._add[x][a]
            k += 1
        return k

    def is_commutative(self):
        return bool(np.array_equal(self.mul_table, self.mul_table.T))

    def one(self):
        """Index of the multiplicative identity, or ``None`` if there is none."""
        idx = np.arange(self.q)
        for e in range(self.q):
            if np.array_equal(self.mul_table[e], idx) and np.array_equal(self.mul_table[:, e], idx):
                return e
        return None

    def is_unit(self, a):
        _, (a,) = self._unwrap(a)
        e = self.one()
        if e is None:
            return False
        return bool(np.any((self.mul_table[a] == e) & (self.mul_table[:, a] == e)))


@dataclass(frozen=True)
class RingElement:
    ring: Ring
    index: int

    def __post_init__(self):
        if not 0 <= self.index < self.ring.q:
            raise InvalidParameterError(f"element index {self.index} outside [0, {self.ring.q})")

    @property
    def ring_id(self):
        return hash(self.ring)

    def __add__(self, other):
        return self.ring.add(self, other)

    def __sub__(self, other):
        return self.ring.sub(self, other)

    def __mul__(self, other):
        return self.ring.mul(self, other)

    def __neg__(self):
        return self.ring.neg(self)

    def __int__(self):
        return self.index

    def __repr__(self):
        return self.ring.element_labels[self.index]


def make_cyclic_ring(q):
    """Return the integers modulo ``q``."""
    if not isinstance(q, (int, np.integer)) or q < 2:
        raise InvalidParameterError(f"cyclic ring needs integer q >= 2, got {q!r}")
    q = int(q)
    idx = np.arange(q)
    add = (idx[:, None] + idx[None, :]) % q
    mul = (idx[:, None] * idx[None, :]) % q
    return Ring(add, mul, name=f"Z{q}", max_q=max(q, MAX_RING_SIZE), validate=q <= MAX_RING_SIZE)


def load_ring_tables(q, add_table, mul_table, *, name=None, max_q=MAX_RING_SIZE):
    """Build a ring from explicit tables after validating every axiom."""
    add = np.asarray(add_table)
    if add.shape != (q, q):
        raise InvalidParameterError(f"addition table has shape {add.shape}, expected {(q, q)}")
    return Ring(add_table, mul_table, name=name, max_q=max_q)


def is_additively_cyclic(ring):
    """Return ``(True, generator)`` if some element has additive order q."""
    for a in range(1, ring.q):
        if ring.additive_order(a) == ring.q:
            return True, a
    return False, None


def has_canonical_cyclic_labels(ring):
    """True iff ``a_k + a_l = a_{(k+l) mod q}`` holds for all index pairs."""
    idx = np.arange(ring.q)
    return bool(np.array_equal(ring.add_table, (idx[:, None] + idx[None, :]) % ring.q))


def read_ring_file(path, *, name=None):
    lines = Path(path).read_text().splitlines()
    head = lines[0].split()
    if len(head) != 2 or head[0] != "ring":
        raise InvalidParameterError(f"{path}: first line must be 'ring q'")
    q = int(head[1])
    body = [ln.split() for ln in lines[1:]]
    # the blank separator line is required by the format
    if len(body) < 2 * q + 1 or body[q]:
        raise InvalidParameterError(f"{path}: expected q addition rows, a blank line, then q multiplication rows")
    add = [[int(v) for v in row] for row in body[:q]]
    mul = [[int(v) for v in row] for row in body[q + 1:2 * q + 1]]
    if any(len(r) != q for r in add + mul):
        raise InvalidParameterError(f"{path}: every table row needs {q} entries")
    return load_ring_tables(q, add, mul, name=name or Path(path).stem)


def write_ring_file(ring, path):
    rows = [f"ring {ring.q}"]
    rows += [" ".join(str(int(v)) for v in r) for r in ring.add_table]
    rows.append("")
    rows += [" ".join(str(int(v)) for v in r) for r in ring.mul_table]
    Path(path).write_text("\n".join(rows) + "\n")
