"""Wave-packet probes of noisy pseudodifferential operators."""

import json

from ._core import (  # noqa: F401
    ConfigError,
    NumericalError,
    OrderPlan,
    WavePacketFamily,
    __version__,
    config_hash,
    inner_product,
    noise_kernel,
    packet_norm,
    parse_config,
    plan_orders,
    sample_noise,
)
from ._core import run as _run


def run(command, config_text, seed=1, trials=None, workers=0):
    """Run a command in memory. Returns (csv_text, summary dict)."""
    csv_text, summary = _run(command, config_text, seed, trials, workers)
    return csv_text, json.loads(summary)
