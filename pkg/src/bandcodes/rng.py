"""Seeded, splittable random sources.

Every stochastic routine in the package takes an explicit ``random.Random``
instance (Mersenne Twister MT19937, CPython's reference implementation).
Child seeds are derived with numpy's ``SeedSequence`` so that independent
trials, arms and nodes get statistically independent streams that depend
only on the root seed and a tuple of integer keys::

    trial_seed = derive_seed(root, arm_index, trial_index)
    rng = make_rng(trial_seed)

The same (root, keys) pair always produces the same stream on every platform.
"""

from __future__ import annotations

import random

import numpy as np

ALGORITHM = "MT19937 (random.Random) seeded via numpy SeedSequence"


def derive_seed(root: int, *keys: int) -> int:
    """Deterministically split ``root`` into a child seed addressed by ``keys``."""
    seq = np.random.SeedSequence(entropy=int(root), spawn_key=tuple(int(k) for k in keys))
    words = seq.generate_state(2, dtype=np.uint64)
    return int(words[0]) | (int(words[1]) << 64)


def make_rng(seed: int, *keys: int) -> random.Random:
    """Return a fresh generator for ``(seed, *keys)``."""
    return random.Random(derive_seed(seed, *keys))


def spawn(rng: random.Random) -> random.Random:
    """Split a child generator off ``rng``, advancing the parent by 128 bits."""
    return random.Random(rng.getrandbits(128))
