"""Dense two-phase primal simplex for ``min c.x  s.t.  A x = b, x >= 0``.

Two arithmetic backends share one pivoting code path:

* ``exact=True``: fraction-free integer pivoting.  Every row stores integers
  ``T`` with a common positive denominator ``D`` (the absolute basis
  determinant), so the true tableau is ``T / D``.  A pivot on ``(r, c)``
  updates the other rows by ``(T_i * T_rc - T_ic * T_r) / D``, which divides
  exactly, and sets ``D = T_rc``.  No rational normalisation is ever done,
  which keeps exact solves cheap in pure Python.
* ``exact=False``: ordinary floating-point Gauss-Jordan pivots with
  tolerance ``tol``.

Pivoting uses Bland's rule (lowest-index entering column; ratio ties broken
by lowest-index leaving variable), so runs are deterministic and cannot
cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import LpSolverError

MAX_PIVOTS = 100_000


def _lcm_denominator(values):
    den = 1
    for v in values:
        if isinstance(v, Fraction):
            den = den * v.denominator // math.gcd(den, v.denominator)
    return den


def _to_int_row(values):
    den = _lcm_denominator(values)
    out = []
    for v in values:
        v = Fraction(v) * den
        if v.denominator != 1:
            raise LpSolverError(f"exact backend needs rational data, got {v!r}")
        out.append(v.numerator)
    return out, den


@dataclass
class SimplexResult:
    status: str
    x: list
    objective: object
    pivots: int
    degenerate_pivots: int
    tableau: "Tableau" = field(repr=False, default=None)

    @property
    def degenerate(self):
        return self.degenerate_pivots > 0


class Tableau:
    """Basis-form tableau; rows carry the right-hand side as their last entry."""

    def __init__(self, rows, basis, ncols, *, exact, tol, denom=1):
        self.rows = rows
        self.basis = basis
        self.ncols = ncols
        self.exact = exact
        self.tol = tol
        self.denom = denom
        self.obj = None
        self.cost_scale = 1.0
        self.pivots = 0
        self.degenerate_pivots = 0

    def copy(self):
        t = Tableau([list(r) for r in self.rows], list(self.basis), self.ncols,
                    exact=self.exact, tol=self.tol, denom=self.denom)
        t.obj = None if self.obj is None else list(self.obj)
        t.cost_scale = self.cost_scale
        return t

    # -- arithmetic helpers -------------------------------------------------

    def _neg(self, v):
        return v < 0 if self.exact else v < -self.tol

    def _pos(self, v):
        return v > 0 if self.exact else v > self.tol

    def value(self, v):
        """True value of a stored entry."""
        return Fraction(v, self.denom) if self.exact else v

    def pivot(self, r, c):
        rows = self.rows
        prow = rows[r]
        p = prow[c]
        if (p == 0) if self.exact else abs(p) <= self.tol:
            raise LpSolverError(f"pivot on zero element {p}")
        if (prow[-1] == 0) if self.exact else abs(prow[-1]) <= self.tol:
            self.degenerate_pivots += 1
        if self.exact:
            if p < 0:
                # only reached when pricing out artificials on rows with rhs 0
                prow = [-v for v in prow]
                rows[r] = prow
                p = -p
            d = self.denom
            targets = [i for i in range(len(rows)) if i != r]
            for i in targets:
                row = rows[i]
                a = row[c]
                if a == 0:
                    if p != d:
                        rows[i] = [v * p // d for v in row]
                elif d == 1:
                    rows[i] = [v * p - a * w for v, w in zip(row, prow)]
                else:
                    rows[i] = [(v * p - a * w) // d for v, w in zip(row, prow)]
            if self.obj is not None:
                a = self.obj[c]
                if d == 1:
                    self.obj = [v * p - a * w for v, w in zip(self.obj, prow)]
                else:
                    self.obj = [(v * p - a * w) // d for v, w in zip(self.obj, prow)]
            self.denom = p
        else:
            prow = [v / p for v in prow]
            rows[r] = prow
            for i, row in enumerate(rows):
                if i != r and row[c] != 0:
                    a = row[c]
                    rows[i] = [v - a * w for v, w in zip(row, prow)]
            if self.obj is not None and self.obj[c] != 0:
                a = self.obj[c]
                self.obj = [v - a * w for v, w in zip(self.obj, prow)]
        self.basis[r] = c
        self.pivots += 1

    def set_cost(self, cost):
        """Install the reduced-cost row for ``cost`` under the current basis.

        In exact mode ``cost`` must already be integral.
        """
        if len(cost) != self.ncols:
            raise LpSolverError(f"cost has {len(cost)} entries, tableau has {self.ncols} columns")
        d = self.denom if self.exact else 1
        if not self.exact:
            # reduced costs are compared relative to the cost magnitude
            self.cost_scale = max([1.0] + [abs(float(cj)) for cj in cost])
        obj = [d * cj for cj in cost] + [0]
        for row, b in zip(self.rows, self.basis):
            cb = cost[b]
            if cb != 0:
                obj = [v - cb * w for v, w in zip(obj, row)]
        self.obj = obj

    def objective(self):
        v = -self.obj[-1]
        return Fraction(v, self.denom) if self.exact else v

    def solution(self):
        zero = Fraction(0) if self.exact else 0.0
        x = [zero] * self.ncols
        for row, b in zip(self.rows, self.basis):
            if b < self.ncols:
                x[b] = self.value(row[-1])
        return x

    def run(self, max_pivots=MAX_PIVOTS):
        """Bland's-rule primal simplex on the installed cost row."""
        limit = self.ncols
        start = self.pivots
        thresh = 0 if self.exact else -self.tol * self.cost_scale
        while True:
            obj = self.obj
            c = next((j for j in range(limit) if obj[j] < thresh), None)
            if c is None:
                return "optimal"
            if self.pivots - start >= max_pivots:
                return "iteration_limit"
            r = None
            for i, row in enumerate(self.rows):
                a = row[c]
                if not self._pos(a):
                    continue
                if r is None:
                    r = i
                    continue
                # compare row[-1]/a against best ratio without dividing
                lhs = row[-1] * self.rows[r][c]
                rhs = self.rows[r][-1] * a
                if self.exact:
                    better = lhs < rhs or (lhs == rhs and self.basis[i] < self.basis[r])
                else:
                    diff = lhs - rhs
                    scale = self.tol * max(1.0, abs(lhs), abs(rhs))
                    better = diff < -scale or (abs(diff) <= scale and self.basis[i] < self.basis[r])
                if better:
                    r = i
            if r is None:
                return "unbounded"
            self.pivot(r, c)

    def add_le_row(self, coeffs, rhs):
        """Append ``coeffs . x <= rhs`` with a fresh slack column that enters the basis.

        The slack must come out non-negative at the current vertex.
        """
        if len(coeffs) != self.ncols:
            raise LpSolverError("constraint width does not match the tableau")
        if self.exact:
            ints, _ = _to_int_row(list(coeffs) + [rhs])
            a, beta = ints[:-1], ints[-1]
            d = self.denom
            new = [d * v for v in a] + [d * beta]
        else:
            a = [float(v) for v in coeffs]
            new = a + [float(rhs)]
        for row, b in zip(self.rows, self.basis):
            ab = a[b] if b < self.ncols else 0
            if ab != 0:
                new = [v - ab * w for v, w in zip(new, row)]
        scale = 1 if self.exact else max([1.0, abs(float(rhs))] + [abs(v) for v in a])
        if new[-1] < (0 if self.exact else -self.tol * scale):
            raise LpSolverError("added constraint is violated at the current vertex",
                                {"slack": self.value(new[-1])})
        if new[-1] < 0:
            new[-1] = 0.0
        one = self.denom if self.exact else 1.0
        for row in self.rows:
            row.insert(-1, 0)
        new.insert(-1, one)
        self.rows.append(new)
        self.basis.append(self.ncols)
        self.ncols += 1
        if self.obj is not None:
            self.obj.insert(-1, 0)
        return self.ncols - 1


class StandardFormLP:
    """Equality-form LP whose phase-1 basis is computed once and reused.

    Decoding solves many LPs over the same polytope with different costs, so
    the feasible starting tableau is cached after the first call.
    """

    def __init__(self, a_rows, b, *, exact=False, tol=1e-9, max_pivots=MAX_PIVOTS):
        self.exact = exact
        self.tol = tol
        self.max_pivots = max_pivots
        self.nrows = len(a_rows)
        self.ncols = len(a_rows[0]) if a_rows else 0
        self._a = [list(r) for r in a_rows]
        self._b = list(b)
        self._start = None
        self.redundant_rows = []

    def _phase1(self):
        m, n = self.nrows, self.ncols
        rows = []
        for i, (arow, bi) in enumerate(zip(self._a, self._b)):
            if self.exact:
                ints, _ = _to_int_row(list(arow) + [bi])
                arow, bi = ints[:-1], ints[-1]
            else:
                arow, bi = [float(v) for v in arow], float(bi)
            if bi < 0:
                arow, bi = [-v for v in arow], -bi
            art = [0] * m
            art[i] = 1
            rows.append(list(arow) + art + [bi])
        zero, one = (0, 1) if self.exact else (0.0, 1.0)
        t = Tableau(rows, list(range(n, n + m)), n + m, exact=self.exact, tol=self.tol)
        t.set_cost([zero] * n + [one] * m)
        status = t.run(self.max_pivots)
        if status != "optimal":
            raise LpSolverError(f"phase 1 ended with status {status}", {"pivots": t.pivots})
        if t._pos(t.objective()):
            raise LpSolverError("polytope is empty", {"phase1_objective": t.objective()})
        # drive artificials out of the basis; rows where that is impossible are redundant
        keep = []
        for r in range(len(t.rows)):
            if t.basis[r] >= n:
                c = next((j for j in range(n) if (t.rows[r][j] != 0 if self.exact
                                                  else abs(t.rows[r][j]) > self.tol)), None)
                if c is None:
                    self.redundant_rows.append(r)
                    continue
                t.obj = None
                t.pivot(r, c)
            keep.append(r)
        rows = [t.rows[r][:n] + [t.rows[r][-1]] for r in keep]
        start = Tableau(rows, [t.basis[r] for r in keep], n, exact=self.exact, tol=self.tol,
                        denom=t.denom)
        start.pivots = t.pivots
        return start

    def start_tableau(self):
        if self._start is None:
            self._start = self._phase1()
        return self._start.copy()

    def minimize(self, cost):
        """Solve for ``cost``; in exact mode the cost may be any rationals."""
        t = self.start_tableau()
        phase1 = t.pivots
        t.pivots = 0
        if self.exact:
            scaled, scale = _to_int_row(list(cost))
        else:
            scaled, scale = [float(v) for v in cost], 1
        t.set_cost(scaled)
        status = t.run(self.max_pivots)
        if status == "iteration_limit":
            raise LpSolverError("simplex iteration limit reached",
                                {"pivots": t.pivots, "phase1_pivots": phase1})
        obj = t.objective() / scale if status == "optimal" else None
        return SimplexResult(status, t.solution() if status == "optimal" else None, obj,
                             t.pivots, t.degenerate_pivots, t)
