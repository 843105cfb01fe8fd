"""Linear-programming decoding over the local-codebook polytope.

Variables are ``f[i, a]`` for every position ``i`` and nonzero element
``a`` (flat index ``i*(q-1) + a-1``), followed by one weight ``w[j, k]``
per local codeword ``k`` of check ``j`` in the code's codebook order.  The
constraints are

* ``w >= 0`` and ``f >= 0`` (the latter is implied),
* ``sum_k w[j, k] == 1`` for every check,
* ``f[i, a] == sum of w[j, k] over local codewords with symbol a at i`` for
  every check ``j``, position ``i`` in its support and nonzero ``a``.

The decoder minimises ``sum lambda[i, a] * f[i, a]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .codes import embed, unembed
from .errors import EnumerationBoundError, InvalidParameterError, LpSolverError
from .simplex import StandardFormLP

LP_VARIABLE_BOUND = 10 ** 6
TOL_INT = 1e-6
TOL_COST = 1e-9


class LpInstance:
    """Variable layout and equality constraints of the decoding polytope."""

    def __init__(self, code, bound=LP_VARIABLE_BOUND):
        q, n = code.ring.q, code.n
        n_w = sum(len(book) for book in code.spc_books)
        if n_w + (q - 1) * n > bound:
            est = {j: q ** (len(s) - 1) for j, s in enumerate(code.row_supports)}
            raise EnumerationBoundError(f"LP variables (local codebook sizes ~{est})",
                                        n_w + (q - 1) * n, bound)
        self.code = code
        self.q = q
        self.n_f = (q - 1) * n
        self.w_offset = []
        off = self.n_f
        for book in code.spc_books:
            self.w_offset.append(off)
            off += len(book)
        self.n_vars = off
        rows, rhs, kinds = [], [], []
        for j, book in enumerate(code.spc_books):
            row = [0] * self.n_vars
            for k in range(len(book)):
                row[self.w_offset[j] + k] = 1
            rows.append(row)
            rhs.append(1)
            kinds.append(("sum", j))
        for j, book in enumerate(code.spc_books):
            for pos, i in enumerate(code.row_supports[j]):
                for a in range(1, q):
                    row = [0] * self.n_vars
                    row[self.f_index(i, a)] = 1
                    for k, b in enumerate(book):
                        if b[pos] == a:
                            row[self.w_offset[j] + k] = -1
                    rows.append(row)
                    rhs.append(0)
                    kinds.append(("marginal", j, i, a))
        self.a_rows = rows
        self.b = rhs
        self.row_kinds = kinds

    @property
    def n_sum_rows(self):
        return self.code.m

    @property
    def n_marginal_rows(self):
        return len(self.a_rows) - self.code.m

    def f_index(self, i, a):
        return i * (self.q - 1) + a - 1

    def w_index(self, j, k):
        return self.w_offset[j] + k

    def names(self):
        out = [f"f_{i}_{a}" for i in range(self.code.n) for a in range(1, self.q)]
        for j, book in enumerate(self.code.spc_books):
            out += [f"w_{j}_{k}" for k in range(len(book))]
        return out

    def cost_vector(self, llr):
        llr = np.asarray(llr)
        if llr.shape != (self.code.n, self.q - 1):
            raise InvalidParameterError(f"llr has shape {llr.shape}, expected {(self.code.n, self.q - 1)}")
        zero = Fraction(0) if llr.dtype == object else 0.0
        return list(llr.reshape(-1)) + [zero] * (self.n_vars - self.n_f)

    def split(self, x):
        """Flat variable vector -> ``(f, w)`` with ``f`` shaped ``(n, q-1)``."""
        x = list(x)
        f = np.array(x[:self.n_f], dtype=object).reshape(self.code.n, self.q - 1)
        w = [list(x[self.w_offset[j]:self.w_offset[j] + len(book)])
             for j, book in enumerate(self.code.spc_books)]
        return f, w

    def join(self, f, w):
        return list(np.asarray(f, dtype=object).reshape(-1)) + [v for wj in w for v in wj]

    def lift(self, word):
        """``(f, w)`` point of a word: its indicator vector with 0/1 local weights."""
        f = embed(word, self.q)
        w = []
        for j, book in enumerate(self.code.spc_books):
            wj = [0] * len(book)
            wj[self.code.spc_index[j][self.code.project(j, word)]] = 1
            w.append(wj)
        return f, w

    def residuals(self, x):
        """Largest violation of the equality rows and of non-negativity."""
        x = list(x)
        eq = max((abs(sum(a * v for a, v in zip(row, x) if a) - bi) for row, bi in zip(self.a_rows, self.b)),
                 default=0)
        neg = max((-v for v in x if v < 0), default=0)
        return max(eq, neg)

    def contains(self, x, tol=0):
        return self.residuals(x) <= tol

    def to_lp_text(self, llr=None):
        """CPLEX LP-format dump for cross-checking with external solvers."""
        names = self.names()
        cost = self.cost_vector(llr) if llr is not None else [0] * self.n_vars
        def expr(coeffs):
            terms = [f"{'-' if c < 0 else '+'} {abs(c)} {names[k]}" for k, c in enumerate(coeffs) if c != 0]
            return " ".join(terms) if terms else "0 " + names[0]
        lines = ["\\ ringdec decoding polytope", "Minimize", " obj: " + expr([float(c) for c in cost]),
                 "Subject To"]
        for r, (row, bi, kind) in enumerate(zip(self.a_rows, self.b, self.row_kinds)):
            label = f"sum_{kind[1]}" if kind[0] == "sum" else f"marg_{kind[1]}_{kind[2]}_{kind[3]}"
            lines.append(f" {label}: {expr(row)} = {bi}")
        lines.append("Bounds")
        lines += [f" {nm} >= 0" for nm in names]
        lines.append("End")
        return "\n".join(lines) + "\n"


def build_polytope(code, bound=LP_VARIABLE_BOUND):
    return LpInstance(code, bound)


@dataclass
class LpDecodeResult:
    status: str  # "codeword", "failure-fractional" or "failure-tie"
    word: tuple | None
    objective: object
    f: np.ndarray
    w: list
    pivots: int
    degenerate: bool
    diagnostics: dict = field(default_factory=dict)


class LpDecoder:
    """LP decoder bound to one code; the phase-1 basis is reused across solves.

    ``exact=True`` selects the fraction-free integer simplex, which needs
    rational LLRs (for example the base-2 LLRs of a dyadic channel) and uses
    zero tolerances.
    """

    def __init__(self, code, *, exact=False, tol_int=TOL_INT, tol_cost=TOL_COST, instance=None):
        self.code = code
        self.instance = instance or build_polytope(code)
        self.exact = exact
        self.tol_int = 0 if exact else tol_int
        self.tol_cost = 0 if exact else tol_cost
        self.lp = StandardFormLP(self.instance.a_rows, self.instance.b, exact=exact)

    def _cost(self, llr):
        cost = self.instance.cost_vector(llr)
        if self.exact:
            cost = [Fraction(c) for c in cost]
        return cost

    def solve(self, llr):
        res = self.lp.minimize(self._cost(llr))
        if res.status == "unbounded":
            raise LpSolverError("LP reported unbounded over a bounded polytope",
                                {"pivots": res.pivots})
        return res

    def _is_fractional(self, v):
        if self.exact:
            return v != 0 and v != 1
        return self.tol_int < v < 1 - self.tol_int

    def tie_probe(self, llr, v_star, reference, solved=None):
        """``"tie"`` if some ``f != reference`` reaches cost ``v_star``, else ``"unique"``.

        Maximises ``d.f`` over the optimal face, where ``d`` is +1 where the
        reference is 0 and -1 where it is 1; only ``f = reference`` attains
        ``d.reference``.
        """
        ref = np.asarray(reference).reshape(-1)
        if solved is None:
            solved = self.solve(llr)
        t = solved.tableau.copy()
        cost = self._cost(llr)
        bound = v_star + self.tol_cost * max(1, abs(v_star))
        t.add_le_row(cost, bound)
        d = [0] * t.ncols
        for k, r in enumerate(ref):
            d[k] = -1 if r == 0 else 1  # minimise -d.f
        unit = 1 if self.exact else 1.0
        t.set_cost([unit * v for v in d])
        status = t.run(self.lp.max_pivots)
        if status != "optimal":
            raise LpSolverError(f"tie probe ended with status {status}", {"pivots": t.pivots})
        best = -t.objective()
        base = -sum(1 for r in ref if r != 0)
        return "tie" if best > base + self.tol_int else "unique"

    def decode(self, llr):
        res = self.solve(llr)
        inst = self.instance
        f, w = inst.split(res.x)
        diag = {"pivots": res.pivots, "degenerate_pivots": res.degenerate_pivots}
        if any(self._is_fractional(v) for v in f.reshape(-1)):
            return LpDecodeResult("failure-fractional", None, res.objective, f, w, res.pivots, res.degenerate, diag)
        f_int = np.array([[1 if v > 0.5 else 0 for v in row] for row in f], dtype=np.int64)
        word = unembed(f_int)
        if self.tie_probe(llr, res.objective, f_int, solved=res) == "tie":
            return LpDecodeResult("failure-tie", word, res.objective, f, w, res.pivots, res.degenerate, diag)
        if not self.code.is_codeword(word):
            raise LpSolverError("integral LP optimum is not a codeword", diag)
        return LpDecodeResult("codeword", word, res.objective, f, w, res.pivots, res.degenerate, diag)

    def codeword_cost(self, llr, word):
        llr = np.asarray(llr)
        total = Fraction(0) if self.exact else 0.0
        for i, s in enumerate(word):
            if s:
                total = total + llr[i, s - 1]
        return total

    def error_events(self, llr, codewords):
        """For each transmitted codeword, whether the received word lies in its LP error set.

        The error set of ``c`` holds every output for which some polytope
        point with ``f != embed(c)`` costs no more than ``embed(c)``.  One LP
        solve is shared by all codewords.
        """
        res = self.solve(llr)
        out = []
        for c in codewords:
            cost_c = self.codeword_cost(llr, c)
            slack = self.tol_cost * max(1, abs(cost_c))
            if res.objective < cost_c - slack:
                out.append(True)
            elif res.objective <= cost_c + slack:
                ref = embed(c, self.code.ring.q)
                out.append(self.tie_probe(llr, res.objective, ref, solved=res) == "tie")
            else:
                raise LpSolverError("codeword cost below the LP optimum",
                                    {"objective": res.objective, "codeword_cost": cost_c})
        return out

    def error_event(self, llr, transmitted):
        if not self.code.is_codeword(transmitted):
            raise InvalidParameterError(f"{transmitted} is not a codeword")
        return self.error_events(llr, [tuple(transmitted)])[0]


def _auto_exact(llr):
    return np.asarray(llr).dtype == object


def decode_lp(code, llr, *, exact=None):
    exact = _auto_exact(llr) if exact is None else exact
    return LpDecoder(code, exact=exact).decode(llr)


def tie_probe(code, llr, v_star, reference, *, exact=None):
    exact = _auto_exact(llr) if exact is None else exact
    return LpDecoder(code, exact=exact).tie_probe(llr, v_star, reference)


def error_event_lp(code, llr, transmitted, *, exact=None):
    exact = _auto_exact(llr) if exact is None else exact
    return LpDecoder(code, exact=exact).error_event(llr, transmitted)
