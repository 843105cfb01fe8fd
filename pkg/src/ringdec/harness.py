"""Experiment driver: Monte Carlo FER, exact error probabilities, ML oracle
and the codeword-independence battery."""

from __future__ import annotations

import csv
import io
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.stats import binomtest, norm

from .channels import DiscreteChannel, compute_llr, make_rng, parse_channel_spec
from .codes import Code, as_word, read_pcm_file
from .errors import ConfigError, EnumerationBoundError, InvalidParameterError
from .lp import LpDecoder
from .rings import make_cyclic_ring, read_ring_file
from .sp import decode_sp
from .sp_log import _Graph, decode_batch

EXHAUSTIVE_BOUND = 10 ** 7
BATTERY_CODEWORD_CAP = 64
FLOAT_TOL = 1e-9


# -- configuration ----------------------------------------------------------------

@dataclass
class DecoderSpec:
    kind: str               # "lp" or "sp"
    iters: int = 0
    early_exit: bool = True

    def __str__(self):
        if self.kind == "lp":
            return "lp"
        return f"sp({self.iters}, {'early' if self.early_exit else 'full'})"


_DEC = re.compile(r"^\s*(lp|sp)\s*(?:\((.*)\))?\s*$")


def parse_decoder(text):
    m = _DEC.match(text)
    if not m:
        raise ConfigError(f"cannot parse decoder {text!r}")
    kind, args = m.group(1), [a.strip() for a in (m.group(2) or "").split(",") if a.strip()]
    if kind == "lp":
        if args:
            raise ConfigError("lp takes no arguments")
        return DecoderSpec("lp")
    if not args:
        raise ConfigError("sp needs an iteration count, e.g. sp(5, early)")
    try:
        iters = int(args[0])
    except ValueError as exc:
        raise ConfigError(f"bad iteration count {args[0]!r}") from exc
    if iters < 1:
        raise ConfigError("sp needs at least one iteration")
    early = True
    if len(args) > 1:
        flag = args[1].lower()
        if flag in ("early", "true", "1", "yes"):
            early = True
        elif flag in ("full", "false", "0", "no", "no_early"):
            early = False
        else:
            raise ConfigError(f"bad early-exit flag {args[1]!r}")
    return DecoderSpec("sp", iters, early)


@dataclass
class ExperimentConfig:
    code: str
    channel: str
    decoders: list
    ring: str = "cyclic"
    exact: bool | None = None
    trials: int = 1000
    exhaustive: bool = False
    codewords: str = "zero"
    seed: int = 0
    output: str | None = None
    received: str | None = None
    bound: int = EXHAUSTIVE_BOUND
    base_dir: str = "."

    @property
    def decoder(self):
        return self.decoders[0]


_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def parse_config(text, base_dir="."):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    vals = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        vals[k.lower()] = v
    known = {"code", "ring", "channel", "decoder", "exact", "trials", "exhaustive",
             "codewords", "seed", "output", "received", "bound"}
    extra = set(vals) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    for key in ("code", "channel", "decoder"):
        if key not in vals:
            raise ConfigError(f"missing required key {key!r}")
    try:
        cfg = ExperimentConfig(
            code=vals["code"], channel=vals["channel"],
            decoders=[parse_decoder(d) for d in vals["decoder"].split(";") if d.strip()],
            ring=vals.get("ring", "cyclic"),
            exact=None if vals.get("exact", "auto").lower() == "auto" else _BOOL[vals["exact"].lower()],
            trials=int(vals.get("trials", 1000)),
            exhaustive=_BOOL[vals.get("exhaustive", "false").lower()],
            codewords=vals.get("codewords", "zero"),
            seed=int(vals.get("seed", 0)),
            output=vals.get("output"),
            received=vals.get("received"),
            bound=int(float(vals.get("bound", EXHAUSTIVE_BOUND))),
            base_dir=str(base_dir),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    if cfg.trials < 1:
        raise ConfigError("trials must be positive")
    if not cfg.decoders:
        raise ConfigError("no decoder given")
    return cfg


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base_dir=path.parent)


@dataclass
class Experiment:
    """A config resolved into code, channel and codeword list."""

    config: ExperimentConfig
    code: Code
    channel: object
    codewords: list


def _resolve(base, p):
    p = Path(p)
    return p if p.is_absolute() else Path(base) / p


def build_ring(spec, q, base_dir="."):
    m = re.fullmatch(r"\s*cyclic\s*(?:\(\s*(\d+)\s*\))?\s*", spec)
    if m:
        qq = int(m.group(1)) if m.group(1) else q
        return make_cyclic_ring(qq)
    return read_ring_file(_resolve(base_dir, spec))


def parse_codewords(spec, code):
    spec = spec.strip()
    if spec == "zero":
        return [code.zero_word()]
    if spec == "all":
        return code.enumerate_codewords()
    m = re.fullmatch(r"fixed\((.*)\)", spec)
    if m:
        words = []
        for item in m.group(1).split(","):
            item = item.strip()
            syms = item.split() if " " in item else list(item)
            w = as_word([int(s) for s in syms], code.ring, code.n)
            if not code.is_codeword(w):
                raise ConfigError(f"{w} is not a codeword")
            words.append(w)
        return words
    m = re.fullmatch(r"random\(\s*(\d+)\s*(?:,\s*(\d+)\s*)?\)", spec)
    if m:
        seed, count = int(m.group(1)), int(m.group(2) or 1)
        book = code.enumerate_codewords()
        idx = make_rng(seed, 1).integers(0, len(book), size=count)
        return [book[int(k)] for k in idx]
    raise ConfigError(f"cannot parse codeword selection {spec!r}")


def build_experiment(cfg):
    try:
        head = _resolve(cfg.base_dir, cfg.code).read_text().split()
        q = int(head[1])
    except (OSError, IndexError, ValueError) as exc:
        raise ConfigError(f"cannot read code file {cfg.code}: {exc}") from exc
    try:
        ring = build_ring(cfg.ring, q, cfg.base_dir)
        code = read_pcm_file(_resolve(cfg.base_dir, cfg.code), ring)
        channel = parse_channel_spec(cfg.channel, ring, n=code.n, base_dir=cfg.base_dir)
        words = parse_codewords(cfg.codewords, code)
    except (InvalidParameterError, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    return Experiment(cfg, code, channel, words)


# -- error models -------------------------------------------------------------------

def is_dyadic(channel):
    """All likelihood ratios between nonzero entries of each output column are powers of two."""
    if not isinstance(channel, DiscreteChannel) or not channel.exact:
        return False
    for y in range(channel.size):
        col = [channel.matrix[a][y] for a in range(channel.ring.q) if channel.matrix[a][y] != 0]
        for p in col[1:]:
            r = col[0] / p
            if r.numerator & (r.numerator - 1) or r.denominator & (r.denominator - 1):
                return False
    return True


class SpErrorModel:
    def __init__(self, code, channel, spec, exact=None):
        self.code, self.channel, self.spec = code, channel, spec
        self.exact = channel.exact if exact is None else exact
        self.status = Counter()
        self._graph = None

    def events(self, received, codewords):
        res = decode_sp(self.code, self.channel, received, self.spec.iters,
                        early_exit=self.spec.early_exit,
                        normalize=None if self.exact else True)
        self.status[res.status] += 1
        return [res.status == "failure-tie" or res.word != tuple(c) for c in codewords]

    def batch_errors(self, received, codeword):
        """Vectorised error flags for many received words and one codeword."""
        if self._graph is None:
            self._graph = _Graph(self.code)
        if self.channel.output_kind == "complex":
            ll = self._psk_table(received)
        else:
            ll = np.stack([self.channel.log_likelihood_table(y) for y in received])
        out = decode_batch(self.code, ll, self.spec.iters, early_exit=self.spec.early_exit, graph=self._graph)
        for b in range(len(received)):
            self.status[out.status(b)] += 1
        wrong = np.any(out.words != np.asarray(codeword)[None, :], axis=1)
        return wrong | out.tied.any(axis=1)

    def _psk_table(self, received):
        ch = self.channel
        y = np.asarray(received, dtype=complex)
        g = np.ones(y.shape[1]) if ch.gains is None else ch.gains
        d = y[:, :, None] - (g[:, None] * ch.points[None, :])[None]
        return ch._log_norm - np.abs(d) ** 2 / (2 * ch.sigma ** 2)


class LpErrorModel:
    def __init__(self, code, channel, exact=None):
        self.code, self.channel = code, channel
        self.exact = is_dyadic(channel) if exact is None else exact
        if self.exact and not is_dyadic(channel):
            raise ConfigError("exact LP needs a discrete channel with power-of-two likelihood ratios")
        self.decoder = LpDecoder(code, exact=self.exact)
        self.status = Counter()

    def llr(self, received):
        return compute_llr(self.channel, received, base2=self.exact, on_undefined="floor")

    def events(self, received, codewords):
        ev = self.decoder.error_events(self.llr(received), codewords)
        self.status["error" if any(ev) else "ok"] += 1
        return ev

    def batch_errors(self, received, codeword):
        return np.array([self.events(y, [codeword])[0] for y in received])


def make_error_model(code, channel, spec, exact=None):
    if spec.kind == "lp":
        return LpErrorModel(code, channel, exact)
    return SpErrorModel(code, channel, spec, exact)


# -- reports ------------------------------------------------------------------------

def wilson_interval(errors, trials, confidence=0.95):
    ci = binomtest(int(errors), int(trials)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def sigma_confidence(k):
    """Two-sided confidence level of a ``k``-sigma normal interval."""
    return float(2 * norm.cdf(k) - 1)


def _word_text(word):
    return " ".join(str(s) for s in word)


@dataclass
class CodewordResult:
    codeword: tuple
    trials: int | None = None
    errors: int | None = None
    fer: float = 0.0
    ci_lo: float | None = None
    ci_hi: float | None = None
    exact: object = None    # Fraction or float error probability
    mass: object = None     # total probability mass enumerated (1 in rational mode)


@dataclass
class FerReport:
    mode: str               # "monte_carlo" or "exact"
    decoder: str
    rows: list
    diagnostics: dict = field(default_factory=dict)

    def probabilities(self):
        return {r.codeword: (r.exact if self.mode == "exact" else r.fer) for r in self.rows}

    def to_csv(self, path=None):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        if self.mode == "monte_carlo":
            wr.writerow(["codeword", "trials", "errors", "fer", "ci_lo", "ci_hi"])
            for r in self.rows:
                wr.writerow([_word_text(r.codeword), r.trials, r.errors, repr(r.fer), repr(r.ci_lo), repr(r.ci_hi)])
        else:
            wr.writerow(["codeword", "exact_num", "exact_den", "fer"])
            for r in self.rows:
                p = r.exact
                if isinstance(p, Fraction):
                    wr.writerow([_word_text(r.codeword), p.numerator, p.denominator, repr(float(p))])
                else:
                    wr.writerow([_word_text(r.codeword), "", "", repr(float(p))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def read_fer_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- Monte Carlo --------------------------------------------------------------------

def run_monte_carlo(config=None, *, code=None, channel=None, decoder=None, codewords=None,
                    trials=None, seed=None, chunk=2000, confidence=0.95):
    """FER estimate per codeword.

    Codeword ``k`` of the selection draws its noise from stream ``k`` of
    ``seed``, so any codeword's result can be reproduced on its own.
    Either pass an :class:`ExperimentConfig` or the parts as keywords.
    """
    if config is not None:
        exp = build_experiment(config)
        code, channel, codewords = exp.code, exp.channel, exp.codewords
        decoder = config.decoder if decoder is None else decoder
        trials = config.trials if trials is None else trials
        seed = config.seed if seed is None else seed
        exact = config.exact
    else:
        exact = None
    if isinstance(decoder, str):
        decoder = parse_decoder(decoder)
    codewords = [code.zero_word()] if codewords is None else [as_word(c, code.ring, code.n) for c in codewords]
    seed = 0 if seed is None else seed
    if decoder.kind == "sp":
        model = SpErrorModel(code, channel, decoder, exact=False)
    else:
        model = LpErrorModel(code, channel, exact)
    rows = []
    for k, c in enumerate(codewords):
        if not code.is_codeword(c):
            raise InvalidParameterError(f"{c} is not a codeword")
        rng = make_rng(seed, k)
        errors = 0
        done = 0
        while done < trials:
            m = min(chunk, trials - done)
            ys = channel.sample_many(c, m, rng)
            if decoder.kind == "lp" and channel.output_kind == "discrete":
                ys = [tuple(int(v) for v in y) for y in ys]
            errors += int(np.sum(model.batch_errors(ys, c)))
            done += m
        lo, hi = wilson_interval(errors, trials, confidence)
        rows.append(CodewordResult(c, trials, errors, errors / trials, lo, hi))
    return FerReport("monte_carlo", str(decoder), rows, {"status": dict(model.status)})


# -- exhaustive enumeration ---------------------------------------------------------

def _outputs_with_support(channel, codewords, n):
    """Yield ``(y, [(k, p(y | codewords[k])) ...])`` for every y with some nonzero term.

    Outputs are visited in mixed-radix (lexicographic) order; a branch is cut
    as soon as every selected codeword gives it probability zero.
    """
    mat = channel.matrix
    size = channel.size
    prefix = [0] * n

    def rec(i, alive):
        if i == n:
            yield tuple(prefix), alive
            return
        for y in range(size):
            nxt = []
            for k, p in alive:
                t = mat[codewords[k][i]][y]
                if t:
                    nxt.append((k, p * t))
            if nxt:
                prefix[i] = y
                yield from rec(i + 1, nxt)

    one = Fraction(1) if channel.exact else 1.0
    yield from rec(0, [(k, one) for k in range(len(codewords))])


def exact_error_probability(config=None, *, code=None, channel=None, decoder=None, codewords=None,
                            bound=EXHAUSTIVE_BOUND, exact=None, model=None):
    """``P(err | c) = sum_y p(y|c) [y in B(c)]`` by enumerating the output space.

    Each received word is decoded once and the result shared by every
    selected codeword.  Probabilities are exact Fractions when the channel
    is rational and the decoder runs in exact mode.
    """
    if config is not None:
        exp = build_experiment(config)
        code, channel, codewords = exp.code, exp.channel, exp.codewords
        decoder = config.decoder if decoder is None else decoder
        bound = config.bound
        exact = config.exact if exact is None else exact
    if isinstance(decoder, str):
        decoder = parse_decoder(decoder)
    if not isinstance(channel, DiscreteChannel):
        raise ConfigError("exhaustive enumeration needs a discrete channel")
    codewords = [code.zero_word()] if codewords is None else [as_word(c, code.ring, code.n) for c in codewords]
    for c in codewords:
        if not code.is_codeword(c):
            raise InvalidParameterError(f"{c} is not a codeword")
    terms = channel.size ** code.n * len(codewords)
    if terms > bound:
        raise EnumerationBoundError("exhaustive error-probability terms", terms, bound)
    model = model or make_error_model(code, channel, decoder, exact)
    zero = Fraction(0) if channel.exact else 0.0
    err = [zero] * len(codewords)
    mass = [zero] * len(codewords)
    visited = 0
    for y, alive in _outputs_with_support(channel, codewords, code.n):
        visited += 1
        ev = model.events(y, [codewords[k] for k, _ in alive])
        for (k, p), e in zip(alive, ev):
            mass[k] += p
            if e:
                err[k] += p
    rows = []
    for c, e, m in zip(codewords, err, mass):
        rows.append(CodewordResult(c, fer=float(e), exact=e, mass=m))
    diag = {"outputs_visited": visited, "status": dict(model.status),
            "exact": bool(channel.exact and getattr(model, "exact", False))}
    return FerReport("exact", str(decoder), rows, diag)


# -- ML oracle ----------------------------------------------------------------------

@dataclass
class MlResult:
    word: tuple
    cost: object
    ties: list


def codeword_costs(code, llr, codewords):
    llr = np.asarray(llr)
    full = np.concatenate([np.zeros((code.n, 1), dtype=llr.dtype), llr], axis=1)
    if llr.dtype == object:
        full[:, 0] = Fraction(0)
    cw = np.asarray(codewords, dtype=np.int64)
    return full[np.arange(code.n)[None, :], cw].sum(axis=1)


def ml_brute_force(code, llr, *, codewords=None, tol=None):
    """Minimum-cost codeword; ``ties`` lists every codeword within ``tol`` of the minimum
    (exact equality for rational llrs)."""
    codewords = code.enumerate_codewords() if codewords is None else codewords
    costs = codeword_costs(code, llr, codewords)
    exact = np.asarray(llr).dtype == object
    if tol is None:
        tol = 0 if exact else 1e-9
    best = min(costs)
    slack = tol * max(1.0, abs(float(best)))
    ties = [tuple(c) for c, v in zip(codewords, costs) if v <= best + slack]
    return MlResult(ties[0], best, ties)


# -- battery ------------------------------------------------------------------------

@dataclass
class BatteryCase:
    decoder: str
    passed: bool
    probabilities: dict
    witness: tuple | None
    exact: bool

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        vals = sorted({str(v) for v in self.probabilities.values()})
        out = f"{status} {self.decoder} exact={self.exact} codewords={len(self.probabilities)} values={vals}"
        if self.witness:
            (c1, p1), (c2, p2) = self.witness
            out += f" witness=[{_word_text(c1)}]:{p1} vs [{_word_text(c2)}]:{p2}"
        return out


@dataclass
class BatteryReport:
    cases: list

    @property
    def passed(self):
        return all(c.passed for c in self.cases)

    def to_text(self):
        lines = [c.line() for c in self.cases]
        lines.append("battery " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines) + "\n"


def _battery_codewords(code, cap):
    book = code.enumerate_codewords()
    if len(book) <= cap:
        return book
    idx = make_rng(0, 3).choice(len(book) - 1, size=cap - 1, replace=False) + 1
    return [book[0]] + [book[int(k)] for k in sorted(idx)]


def compare_probabilities(probs, tol=FLOAT_TOL):
    """``(passed, witness)``; exact comparison for Fractions."""
    items = list(probs.items())
    c0, p0 = items[0]
    worst = None
    for c, p in items[1:]:
        if isinstance(p, Fraction) and isinstance(p0, Fraction):
            bad = p != p0
            dev = abs(p - p0)
        else:
            dev = abs(float(p) - float(p0))
            bad = dev > tol
        if bad and (worst is None or dev > worst[0]):
            worst = (dev, ((c0, p0), (c, p)))
    return worst is None, None if worst is None else worst[1]


def independence_battery(config=None, *, code=None, channel=None, decoders=None, codewords=None,
                         cap=BATTERY_CODEWORD_CAP, exact=None, bound=EXHAUSTIVE_BOUND):
    """Exact P(err|c) for all (or a capped subset with 0) codewords under each decoder;
    a decoder passes when all values coincide."""
    if config is not None:
        exp = build_experiment(config)
        code, channel = exp.code, exp.channel
        decoders = config.decoders if decoders is None else decoders
        exact = config.exact if exact is None else exact
        bound = config.bound
        if config.codewords != "zero":
            codewords = exp.codewords
    decoders = [parse_decoder(d) if isinstance(d, str) else d for d in decoders]
    if codewords is None:
        codewords = _battery_codewords(code, cap)
    cases = []
    for spec in decoders:
        model = make_error_model(code, channel, spec, exact)
        rep = exact_error_probability(code=code, channel=channel, decoder=spec, codewords=codewords,
                                      bound=bound, model=model)
        probs = rep.probabilities()
        ok, witness = compare_probabilities(probs)
        cases.append(BatteryCase(str(spec), ok, probs, witness, rep.diagnostics["exact"]))
    return BatteryReport(cases)
