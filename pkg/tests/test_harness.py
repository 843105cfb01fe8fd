from fractions import Fraction

import numpy as np
import pytest

from ringdec.channels import compute_llr, make_rng, psk_awgn_channel, qsc_channel, read_discrete_channel
from ringdec.codes import Code
from ringdec.errors import ConfigError, EnumerationBoundError
from ringdec.harness import (codeword_costs, exact_error_probability, load_config, ml_brute_force,
                             parse_codewords, parse_config, parse_decoder, read_fer_csv,
                             run_monte_carlo, sigma_confidence, independence_battery, wilson_interval)
from ringdec.lp import LpDecoder


def test_parse_decoder():
    assert str(parse_decoder("lp")) == "lp"
    d = parse_decoder("sp(7, full)")
    assert (d.kind, d.iters, d.early_exit) == ("sp", 7, False)
    assert parse_decoder("sp(3)").early_exit
    for bad in ("sp", "sp(0)", "lp(2)", "bp(3)", "sp(2, maybe)"):
        with pytest.raises(ConfigError):
            parse_decoder(bad)


def test_parse_config_errors():
    with pytest.raises(ConfigError, match="missing"):
        parse_config("code = a.pcm\nchannel = qsc(1/2)\n")
    with pytest.raises(ConfigError, match="unknown"):
        parse_config("code=a\nchannel=qsc(0)\ndecoder=lp\ncolour=red\n")
    with pytest.raises(ConfigError):
        parse_config("code=a\nchannel=qsc(0)\ndecoder=lp\ntrials=ten\n")
    with pytest.raises(ConfigError):
        parse_config("just words\n")


def test_load_config(data_dir):
    cfg = load_config(data_dir / "battery_negative.cfg")
    assert [str(d) for d in cfg.decoders] == ["sp(5, early)", "lp"]
    assert cfg.codewords == "all" and cfg.exact is None
    with pytest.raises(ConfigError):
        load_config(data_dir / "missing.cfg")


def test_codeword_selection(cycle_code):
    assert parse_codewords("zero", cycle_code) == [(0,) * 6]
    assert len(parse_codewords("all", cycle_code)) == 27
    words = parse_codewords("fixed(0 0 0 1 2 1, 000212)", cycle_code)
    assert words == [(0, 0, 0, 1, 2, 1), (0, 0, 0, 2, 1, 2)]
    assert parse_codewords("random(4, 5)", cycle_code) == parse_codewords("random(4, 5)", cycle_code)
    with pytest.raises(ConfigError):
        parse_codewords("fixed(1 0 0 0 0 0)", cycle_code)
    with pytest.raises(ConfigError):
        parse_codewords("some", cycle_code)


def test_zero_noise_fer(cycle_code):
    ch = qsc_channel(cycle_code.ring, 0)
    words = cycle_code.enumerate_codewords()[:5]
    for dec in ("sp(5)", "lp"):
        rep = run_monte_carlo(code=cycle_code, channel=ch, decoder=dec, codewords=words, trials=50)
        assert all(r.errors == 0 for r in rep.rows)
        ex = exact_error_probability(code=cycle_code, channel=ch, decoder=dec, codewords=words)
        assert all(r.exact == 0 and r.mass == 1 for r in ex.rows)


def test_monte_carlo_reproducible(z4_code):
    ch = psk_awgn_channel(z4_code.ring, 0.6)
    kw = dict(code=z4_code, channel=ch, decoder="sp(6)", trials=300, seed=5,
              codewords=z4_code.enumerate_codewords()[:3])
    a, b = run_monte_carlo(**kw), run_monte_carlo(**kw)
    assert a.to_csv() == b.to_csv()
    c = run_monte_carlo(**{**kw, "seed": 6})
    assert c.to_csv() != a.to_csv()


def test_two_bit_repetition_hand_enumeration(z2):
    # y = 00 decodes to 00, y = 11 to 11, y = 01 and 10 tie: P(err | 00) = 3/16 + 3/16 + 1/16
    code = Code(z2, [[1, 1]])
    ch = qsc_channel(z2, Fraction(1, 4))
    rep = exact_error_probability(code=code, channel=ch, decoder="sp(2)", codewords=[(0, 0), (1, 1)])
    assert [r.exact for r in rep.rows] == [Fraction(7, 16), Fraction(7, 16)]
    assert rep.diagnostics["outputs_visited"] == 4


def test_z3_n4_all_codewords_equal(z3_n4):
    ch = qsc_channel(z3_n4.ring, Fraction(1, 4))
    rep = exact_error_probability(code=z3_n4, channel=ch, decoder="sp(5)",
                                  codewords=z3_n4.enumerate_codewords())
    values = {r.exact for r in rep.rows}
    assert len(values) == 1
    assert all(isinstance(v, Fraction) for v in values)
    assert all(r.mass == 1 for r in rep.rows)
    assert rep.diagnostics["outputs_visited"] == 81


def test_pruning(z3_n4):
    # with the zero-noise channel only y = c carries mass
    ch = qsc_channel(z3_n4.ring, 0)
    rep = exact_error_probability(code=z3_n4, channel=ch, decoder="sp(2)", codewords=[(0, 0, 0, 0)])
    assert rep.diagnostics["outputs_visited"] == 1


def test_enumeration_bound(cycle_code):
    ch = qsc_channel(cycle_code.ring, Fraction(1, 4))
    with pytest.raises(EnumerationBoundError):
        exact_error_probability(code=cycle_code, channel=ch, decoder="sp(2)", bound=100)
    with pytest.raises(ConfigError):
        exact_error_probability(code=cycle_code, channel=psk_awgn_channel(cycle_code.ring, 1.0), decoder="sp(2)")


def test_monte_carlo_matches_exact(z3_n4):
    ch = qsc_channel(z3_n4.ring, Fraction(1, 4))
    exact = exact_error_probability(code=z3_n4, channel=ch, decoder="sp(5)").rows[0].exact
    mc = run_monte_carlo(code=z3_n4, channel=ch, decoder="sp(5)", trials=4000, seed=2,
                         confidence=sigma_confidence(3)).rows[0]
    assert mc.ci_lo <= float(exact) <= mc.ci_hi


def test_ml_brute_force(cycle_code):
    ch = qsc_channel(cycle_code.ring, 0)
    c = cycle_code.enumerate_codewords()[11]
    ml = ml_brute_force(cycle_code, compute_llr(ch, c, on_undefined="floor"))
    assert ml.word == c
    zero = np.array([[Fraction(0)] * 2] * 6, dtype=object)
    assert len(ml_brute_force(cycle_code, zero).ties) == 27
    lam = np.array([[Fraction(1), Fraction(-2)]] * 6, dtype=object)
    costs = codeword_costs(cycle_code, lam, [(0,) * 6, (0, 0, 0, 1, 2, 1), (0, 0, 0, 2, 1, 2)])
    assert list(costs) == [0, 0, -3]


def test_ml_agrees_with_lp(z3_n4):
    dec = LpDecoder(z3_n4, exact=True)
    words = z3_n4.enumerate_codewords()
    rng = make_rng(8)
    hits = 0
    for _ in range(100):
        lam = np.array([[Fraction(int(v)) for v in r] for r in rng.integers(-4, 5, size=(4, 2))], dtype=object)
        res = dec.decode(lam)
        if res.status == "codeword":
            hits += 1
            ml = ml_brute_force(z3_n4, lam, codewords=words)
            assert res.word == ml.word and len(ml.ties) == 1
    assert hits > 20


def test_wilson():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0 and 0 < hi < 0.05
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    assert abs(sigma_confidence(3) - 0.9973) < 1e-4


def test_battery_pass_and_fail(z3_n4, data_dir):
    sym = qsc_channel(z3_n4.ring, Fraction(1, 2))
    rep = independence_battery(code=z3_n4, channel=sym, decoders=["sp(5)", "lp"])
    assert rep.passed and all(c.exact for c in rep.cases)
    bad = read_discrete_channel(data_dir / "asymmetric3.channel", z3_n4.ring)
    rep = independence_battery(code=z3_n4, channel=bad, decoders=["sp(5)", "lp"])
    assert not rep.passed
    for case in rep.cases:
        (c1, p1), (c2, p2) = case.witness
        assert c1 != c2 and p1 != p2
    assert "FAIL" in rep.to_text()


def test_float_channel_battery(z3_n4):
    ch = qsc_channel(z3_n4.ring, 0.2)
    rep = independence_battery(code=z3_n4, channel=ch, decoders=["sp(4)"])
    assert rep.passed and not rep.cases[0].exact


def test_csv(tmp_path, z3_n4):
    ch = qsc_channel(z3_n4.ring, Fraction(1, 4))
    rep = exact_error_probability(code=z3_n4, channel=ch, decoder="sp(3)", codewords=[(0, 0, 0, 0)])
    rows = None
    rep.to_csv(tmp_path / "e.csv")
    rows = read_fer_csv(tmp_path / "e.csv")
    assert list(rows[0]) == ["codeword", "exact_num", "exact_den", "fer"]
    assert Fraction(int(rows[0]["exact_num"]), int(rows[0]["exact_den"])) == rep.rows[0].exact
    mc = run_monte_carlo(code=z3_n4, channel=ch, decoder="sp(3)", trials=10)
    assert mc.to_csv().splitlines()[0] == "codeword,trials,errors,fer,ci_lo,ci_hi"
