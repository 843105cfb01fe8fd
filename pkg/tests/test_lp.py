from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from ringdec.channels import compute_llr, make_rng, qsc_channel
from ringdec.codes import Code, embed
from ringdec.harness import ml_brute_force
from ringdec.lp import LpDecoder, build_polytope, decode_lp, error_event_lp, tie_probe
from ringdec.rings import make_cyclic_ring


def F(rows):
    return np.array([[Fraction(v) for v in r] for r in rows], dtype=object)


def test_polytope_sizes(z2, z3):
    inst = build_polytope(Code(z2, [[1, 1, 1]]))
    assert inst.n_vars - inst.n_f == 4 and inst.n_f == 3
    assert inst.n_sum_rows == 1 and inst.n_marginal_rows == 3
    inst = build_polytope(Code(z3, [[1, 1]]))
    assert inst.n_vars - inst.n_f == 3 and inst.n_f == 4


def test_lifts_feasible(cycle_code):
    inst = build_polytope(cycle_code)
    for c in cycle_code.enumerate_codewords():
        f, w = inst.lift(c)
        assert inst.residuals(inst.join(f, w)) == 0


def test_non_codeword_lift_infeasible(cycle_code):
    inst = build_polytope(cycle_code)
    f = embed((1, 0, 0, 0, 0, 0), 3)
    # best effort: w from the zero word leaves marginal rows violated
    _, w = inst.lift((0,) * 6)
    assert inst.residuals(inst.join(f, w)) > 0


def test_lp_text_dump(z3):
    text = build_polytope(Code(z3, [[1, 1]])).to_lp_text(F([[1, 2], [3, 4]]))
    assert text.startswith("\\") and "Subject To" in text and text.rstrip().endswith("End")
    assert "sum_0:" in text and "marg_0_1_2:" in text


@pytest.mark.parametrize("exact", [True, False])
def test_zero_noise_recovers_every_codeword(cycle_code, exact):
    ch = qsc_channel(cycle_code.ring, 0)
    dec = LpDecoder(cycle_code, exact=exact)
    for c in cycle_code.enumerate_codewords()[::4]:
        llr = compute_llr(ch, c, base2=exact, on_undefined="floor")
        res = dec.decode(llr)
        assert res.status == "codeword" and res.word == c
        assert not dec.error_event(llr, c)


def test_single_check_z3(z3):
    code = Code(z3, [[1, 1]])
    llr = F([[-1, 1], [1, -1]])  # costs: 00 -> 0, 12 -> -2, 21 -> 2
    res = decode_lp(code, llr)
    assert res.status == "codeword" and res.word == (1, 2)
    assert res.objective == -2
    assert ml_brute_force(code, llr).word == (1, 2)


def test_float_and_exact_agree(cycle_code):
    rng = make_rng(3)
    de, dfl = LpDecoder(cycle_code, exact=True), LpDecoder(cycle_code)
    for _ in range(20):
        raw = rng.integers(-4, 5, size=(6, 2))
        a, b = de.decode(F(raw)), dfl.decode(raw.astype(float))
        assert a.status == b.status
        assert abs(float(a.objective) - b.objective) < 1e-9


def test_fractional_optimum_found_by_search():
    # randomized search for a pseudocodeword on a code with cycles
    code = Code(make_cyclic_ring(3), [[1, 1, 1, 0, 0, 0], [0, 0, 1, 1, 1, 0], [1, 0, 0, 0, 1, 1]])
    dec = LpDecoder(code, exact=True)
    words = code.enumerate_codewords()
    rng = make_rng(5)
    found = None
    for _ in range(200):
        llr = F(rng.integers(-3, 4, size=(6, 2)))
        res = dec.decode(llr)
        if res.status == "failure-fractional":
            found = (res, ml_brute_force(code, llr, codewords=words))
            break
    assert found is not None
    res, ml = found
    assert res.word is None
    assert res.objective < ml.cost


def test_tie_probe_cases(z2):
    code = Code(z2, [[1, 1]])
    assert tie_probe(code, F([[-1], [-1]]), Fraction(-2), embed((1, 1), 2)) == "unique"
    assert tie_probe(code, F([[0], [0]]), Fraction(0), embed((0, 0), 2)) == "tie"
    # QSC with crossover 1/3 gives base-2 llr (1, -1) for y = (0, 1): 00 and 11 both cost 0
    ch = qsc_channel(z2, Fraction(1, 3))
    llr = compute_llr(ch, (0, 1), base2=True)
    assert llr.tolist() == [[1], [-1]]
    res = decode_lp(code, llr)
    assert res.status == "failure-tie"
    assert tie_probe(code, llr, res.objective, embed((0, 0), 2)) == "tie"


def test_error_event_zero_llr(cycle_code):
    llr = F(np.zeros((6, 2), dtype=int))
    dec = LpDecoder(cycle_code, exact=True)
    words = cycle_code.enumerate_codewords()
    assert all(dec.error_events(llr, words))
    assert error_event_lp(cycle_code, llr, words[3])


def _b_membership_highs(inst, llr, c, q):
    """Independent two-LP evaluation of y in B(c) with a different solver."""
    cost = np.array([float(v) for v in inst.cost_vector(llr)])
    a, b = np.array(inst.a_rows, dtype=float), np.array(inst.b, dtype=float)
    first = linprog(cost, A_eq=a, b_eq=b, bounds=(0, None), method="highs")
    ref = embed(c, q).reshape(-1)
    cc = float(sum(float(v) for v, r in zip(cost, ref) if r))
    if first.fun < cc - 1e-7:
        return True
    d = np.zeros(len(cost))
    d[:len(ref)] = np.where(ref == 0, 1.0, -1.0)
    second = linprog(-d, A_ub=cost[None, :], b_ub=[first.fun + 1e-9], A_eq=a, b_eq=b,
                     bounds=(0, None), method="highs")
    return -second.fun > d[:len(ref)] @ ref + 1e-7


def test_error_sets_match_independent_solver(z3_n4):
    ch = qsc_channel(z3_n4.ring, Fraction(1, 2))
    dec = LpDecoder(z3_n4, exact=True)
    words = z3_n4.enumerate_codewords()
    import itertools
    for y in itertools.product(range(3), repeat=4):
        llr = compute_llr(ch, y, base2=True)
        ours = dec.error_events(llr, words)
        for c, e in zip(words, ours):
            assert e == _b_membership_highs(dec.instance, llr, c, 3), (y, c)
