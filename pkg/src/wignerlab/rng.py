"""Seed derivation and counter-based uniform streams."""
from __future__ import annotations

import numpy as np

_TWO53 = float(2**53)


def derive_seed(master: int, *index: int) -> int:
    """64-bit seed that depends only on ``(master, *index)``."""
    ss = np.random.SeedSequence([int(master) & 0xFFFFFFFFFFFFFFFF, *map(int, index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def philox(seed: int, stream: int = 0) -> np.random.Generator:
    key = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(stream)]).generate_state(
        2, dtype=np.uint64
    )
    return np.random.Generator(np.random.Philox(key=key))


def open_uniforms(seed: int, stream: int, shape) -> np.ndarray:
    """Uniforms in the open interval (0, 1) from a Philox stream.

    Element ``idx`` of the row-major layout is the ``idx``-th counter value
    of the stream, so every entry is fixed by ``(seed, stream, position)``.
    """
    bits = philox(seed, stream).integers(0, 2**53, size=shape, dtype=np.int64)
    return (bits.astype(float) + 0.5) / _TWO53
