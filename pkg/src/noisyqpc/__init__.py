"""Three-party quantum private comparison over noisy Pauli channels."""

from .codes import CssCode, LinearCode, build_css, coset_label, encode_key, load_css_code, steane_code
from .css_qpc import KeyDistConfig, run_protocol2, run_protocol3, run_repeated_qpc
from .epr_qpc import EprConfig, run_protocol1, simulate_protocol1
from .gf2 import BitMatrix, BitString
from .noise import (
    PauliChannel,
    PauliErrorString,
    bit_flip_channel,
    compose,
    depolarizing_channel,
    make_rng,
    phase_flip_channel,
)

__version__ = "0.1.0"
