"""Chaotic stream encryption of a 10GBASE-R 64b/66b block stream."""

from .chaos import BasicGenerator, GeneratorKey, KeystreamBank64, SyncGenerator, stm_step, lfsr_step
from .cipher import CipherKey, SecDirectionArray, SecDirectionState, cipher_block
from .linecode import Block66, decode_block, encode_group
from .sim import FrameSpec, LinkReport, SimConfig, bench_throughput, run_simulation

__all__ = [
    "BasicGenerator", "GeneratorKey", "KeystreamBank64", "SyncGenerator", "stm_step",
    "lfsr_step", "CipherKey", "SecDirectionArray", "SecDirectionState", "cipher_block",
    "Block66", "decode_block", "encode_group", "FrameSpec", "LinkReport", "SimConfig",
    "bench_throughput", "run_simulation",
]
