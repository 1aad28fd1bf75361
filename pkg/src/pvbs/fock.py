"""Fixed-particle-number occupation bases.

Configurations are base-3 integers over the volume's canonical site
order: digit 0 = empty, 1 = species a, 2 = species b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .lattice import Volume

EMPTY, A, B = 0, 1, 2
DEFAULT_SECTOR_CAP = 5_000_000


class FockError(ValueError):
    pass


def sector_dimension(n: int, n_a: int, n_b: int) -> int:
    if n_a < 0 or n_b < 0 or n_a + n_b > n:
        raise FockError(f"invalid sector ({n_a}, {n_b}) for {n} sites")
    return math.comb(n, n_a) * math.comb(n - n_a, n_b)


def encode(symbols) -> int:
    """Base-3 encoding; symbols[i] is the digit at canonical site i."""
    code = 0
    for i, s in enumerate(symbols):
        code += s * 3 ** i
    return code


def decode(code: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        code, r = divmod(code, 3)
        out.append(r)
    return tuple(out)


@dataclass(frozen=True)
class SectorBasis:
    volume: Volume
    n_a: int
    n_b: int
    states: tuple[int, ...]  # sorted base-3 codes
    index: dict  # code -> position

    @property
    def dim(self) -> int:
        return len(self.states)

    def index_of(self, code: int) -> int:
        try:
            return self.index[code]
        except KeyError:
            raise FockError(f"configuration {code} not in sector "
                            f"({self.n_a}, {self.n_b})") from None


def enumerate_sector(v: Volume, n_a: int, n_b: int,
                     cap: int = DEFAULT_SECTOR_CAP) -> SectorBasis:
    """Complete sorted basis of the (n_a, n_b) particle sector on v."""
    n = len(v)
    dim = sector_dimension(n, n_a, n_b)
    if dim > cap:
        raise FockError(
            f"sector ({n_a}, {n_b}) on {n} sites has dimension {dim} > cap {cap}")
    pow3 = [3 ** i for i in range(n)]
    codes = []
    for a_sites in combinations(range(n), n_a):
        rest = [i for i in range(n) if i not in a_sites]
        base = sum(pow3[i] for i in a_sites)
        for b_sites in combinations(rest, n_b):
            codes.append(base + 2 * sum(pow3[i] for i in b_sites))
    codes.sort()
    return SectorBasis(v, n_a, n_b, tuple(codes),
                       {c: i for i, c in enumerate(codes)})
