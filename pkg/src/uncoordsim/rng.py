"""Seeded random streams for reproducible simulations.

Every random entity (a client's arrival process, request sizes, probe
decisions) owns its own xoshiro256++ stream derived from the master seed
and a small stream id, so changing one entity never perturbs the draws of
another.  The generator is implemented here rather than taken from
``random``/``numpy`` because the compiled engine re-implements the exact
same integer recurrence in C, and the two must produce bit-identical
doubles.
"""

import math

MASK64 = 0xFFFFFFFFFFFFFFFF

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_STREAM_SALT = 0xD1B54A32D192ED03

# Substreams owned by one client, in fixed order.
STREAM_ARRIVAL = 0
STREAM_OPS = 1
STREAM_POLICY = 2
STREAMS_PER_CLIENT = 3

_DOUBLE_UNIT = 1.0 / 9007199254740992.0  # 2**-53, exact


def splitmix64(state):
    """One splitmix64 step: returns (next_state, output)."""
    state = (state + _SPLITMIX_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def substream_state(master_seed, stream_id):
    """Derive the 4-word xoshiro256++ state for one substream.

    The same (master_seed, stream_id) pair always yields the same state;
    distinct stream ids give statistically independent streams.
    """
    s = (int(master_seed) ^ ((stream_id + 1) * _STREAM_SALT)) & MASK64
    words = []
    for _ in range(4):
        s, w = splitmix64(s)
        words.append(w)
    if words[0] == words[1] == words[2] == words[3] == 0:
        words[0] = _SPLITMIX_GAMMA  # all-zero state is invalid for xoshiro
    return tuple(words)


def client_stream_id(client_id, which):
    return client_id * STREAMS_PER_CLIENT + which


class Stream:
    """A xoshiro256++ stream with the draw helpers the simulator needs."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, state):
        self.s0, self.s1, self.s2, self.s3 = state

    @classmethod
    def for_entity(cls, master_seed, stream_id):
        return cls(substream_state(master_seed, stream_id))

    def state(self):
        return (self.s0, self.s1, self.s2, self.s3)

    def clone(self):
        return Stream(self.state())

    def next_u64(self):
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        x = (s0 + s3) & MASK64
        result = (((x << 23) | (x >> 41)) + s0) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return result

    def next_double(self):
        """Uniform double in (0, 1]."""
        return ((self.next_u64() >> 11) + 1) * _DOUBLE_UNIT

    def exponential(self, mean):
        """Exponential draw with the given mean, via inverse transform."""
        v = -mean * math.log(self.next_double())
        if v <= 0.0:  # next_double() can hit exactly 1.0
            v = mean * 1e-300
        return v

    def uniform_index(self, n):
        """Uniform integer in [0, n). Modulo bias is negligible for n << 2**64."""
        return self.next_u64() % n
