"""Deterministic child-seed derivation.

``mix64(master, index)`` is the SplitMix64 output function applied to
``master + (index + 1) * 0x9E3779B97F4A7C15`` (mod 2**64):

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

The finalizer is a bijection of 64-bit words, so distinct indices under the
same master seed always give distinct child seeds.
"""

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(master: int, index: int) -> int:
    z = (int(master) + (int(index) + 1) * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)
