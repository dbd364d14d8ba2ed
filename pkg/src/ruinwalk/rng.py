"""Counter-based random numbers for reproducible, order-independent trials.

The simulator needs one uniform per (trial, step) that is a pure function of
``(seed, trial, step)``: results must not depend on execution order, chunking
or worker count.  Stateful generators cannot give that cheaply, so this
module implements the Philox-4x32 block cipher (10 rounds) over numpy
arrays.  Each evaluation maps a 128-bit counter and a 64-bit key to four
32-bit words; the simulator uses the counter layout

    (step, trial_low32, trial_high32, 0)    key = (seed_low32, seed_high32)

and keeps word 0 of the output as its uniform.  The implementation is
checked against the published known-answer vectors in the test suite.
"""

from __future__ import annotations

import numpy as np

PHILOX_M0 = np.uint64(0xD2511F53)
PHILOX_M1 = np.uint64(0xCD9E8D57)
PHILOX_W0 = np.uint32(0x9E3779B9)
PHILOX_W1 = np.uint32(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_ROUNDS = 10

GENERATOR_NAME = "philox4x32-10"


def _mulhilo(m: np.uint64, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """32x32 -> 64 bit product split into (hi, lo) 32-bit words."""
    prod = m * x.astype(np.uint64)
    return (prod >> np.uint64(32)).astype(np.uint32), (prod & _MASK32).astype(np.uint32)


def philox4x32(counter: np.ndarray, key: tuple[int, int]) -> np.ndarray:
    """Apply Philox-4x32-10 to an (n, 4) uint32 counter block.

    ``key`` is a pair of 32-bit words, shared by all rows.  Returns an
    (n, 4) uint32 array.
    """
    counter = np.asarray(counter, dtype=np.uint32)
    if counter.ndim != 2 or counter.shape[1] != 4:
        raise ValueError(f"counter must have shape (n, 4), got {counter.shape}")
    c0 = counter[:, 0].copy()
    c1 = counter[:, 1].copy()
    c2 = counter[:, 2].copy()
    c3 = counter[:, 3].copy()
    k0 = np.uint32(key[0])
    k1 = np.uint32(key[1])
    for rnd in range(_ROUNDS):
        if rnd > 0:
            # key schedule is wrap-around 32-bit addition
            k0 = np.uint32((int(k0) + int(PHILOX_W0)) & 0xFFFFFFFF)
            k1 = np.uint32((int(k1) + int(PHILOX_W1)) & 0xFFFFFFFF)
        hi0, lo0 = _mulhilo(PHILOX_M0, c0)
        hi1, lo1 = _mulhilo(PHILOX_M1, c2)
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
    return np.stack([c0, c1, c2, c3], axis=1)


def split_key(seed: int) -> tuple[int, int]:
    """Fold an arbitrary integer seed into the 64-bit Philox key."""
    seed = int(seed) % (1 << 64)
    return seed & 0xFFFFFFFF, seed >> 32


def step_uniforms(seed: int, trials: np.ndarray, step: int) -> np.ndarray:
    """One uniform in [0, 1) per trial for a given step index.

    ``trials`` is an integer array of trial indices; the result for a given
    (seed, trial, step) triple is the same however the call is batched.
    """
    trials = np.asarray(trials, dtype=np.uint64)
    n = trials.shape[0]
    counter = np.empty((n, 4), dtype=np.uint32)
    counter[:, 0] = np.uint32(step & 0xFFFFFFFF)
    counter[:, 1] = (trials & _MASK32).astype(np.uint32)
    counter[:, 2] = (trials >> np.uint64(32)).astype(np.uint32)
    counter[:, 3] = 0
    words = philox4x32(counter, split_key(seed))
    return words[:, 0].astype(np.float64) * 2.0 ** -32
