"""Deterministic seed derivation for reproducible experiment trees.

A child seed is the first 8 bytes (big-endian) of
SHA-256("xmcmc-seed-v1:<master>:<i0>:<i1>:..."), so seeds are stable
across platforms and Python versions and effectively collision-free for
any realistic index space.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master_seed: int, *indices: int) -> int:
    """64-bit child seed for a (master, index...) path."""
    text = "xmcmc-seed-v1:" + ":".join(str(int(v)) for v in (master_seed, *indices))
    digest = hashlib.sha256(text.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


def make_rng(master_seed: int, *indices: int) -> np.random.Generator:
    """Generator seeded from the derived child seed."""
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, *indices)))
