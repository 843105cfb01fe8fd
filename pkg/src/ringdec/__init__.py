"""LP and sum-product decoding of linear codes over finite rings."""

from .channels import (CLAMP, DiscreteChannel, PskChannel, apply_g_transform, compute_llr,
                       make_rng, psk_awgn_channel, psk_fading_channel, qsc_channel,
                       verify_symmetry)
from .codes import Code, embed, read_pcm_file, unembed, write_pcm_file
from .errors import (ConfigError, EnumerationBoundError, InvalidParameterError, LpSolverError,
                     NotIntegralError, PskIncompatibleError, RingAxiomError, RingDecError,
                     RingMismatchError, UndefinedLlrError)
from .harness import (exact_error_probability, ml_brute_force, run_monte_carlo,
                      independence_battery)
from .lp import LpDecoder, build_polytope, decode_lp, error_event_lp, tie_probe
from .rings import Ring, RingElement, load_ring_tables, make_cyclic_ring
from .sp import decode_sp, error_event_sp

__version__ = "0.1.0"
