"""Finite subvolumes of Z^d: boxes, tilted parallelepipeds, slabs.

Sites are tuples of ints in lexicographic (canonical) order, so every
derived object (edges, bases, serializations) is deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

MAX_DIM = 4

Site = tuple[int, ...]


class LatticeError(ValueError):
    pass


def _check_dim(d: int) -> None:
    if not 1 <= d <= MAX_DIM:
        raise LatticeError(f"dimension must be in 1..{MAX_DIM}, got {d}")


@dataclass(frozen=True)
class Edge:
    """Ordered nearest-neighbor pair (base, base + e_direction)."""

    base: Site
    direction: int  # 0-based coordinate index

    @property
    def head(self) -> Site:
        x = list(self.base)
        x[self.direction] += 1
        return tuple(x)


@dataclass(frozen=True)
class Volume:
    dim: int
    sites: tuple[Site, ...]
    label: str = ""
    _site_set: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_dim(self.dim)
        ordered = tuple(sorted(set(self.sites)))
        if len(ordered) != len(self.sites):
            raise LatticeError("duplicate sites in volume")
        object.__setattr__(self, "sites", ordered)
        object.__setattr__(self, "_site_set", frozenset(ordered))

    def __len__(self) -> int:
        return len(self.sites)

    def __contains__(self, site: Site) -> bool:
        return site in self._site_set

    def index(self, site: Site) -> int:
        # sites are sorted, but a dict is O(1); volumes are small
        return self.sites.index(site)

    def issubset(self, other: "Volume") -> bool:
        return self._site_set <= other._site_set

    def difference(self, other: "Volume", label: str = "") -> "Volume":
        return Volume(self.dim, tuple(self._site_set - other._site_set), label)

    def translate(self, offset: Site) -> "Volume":
        moved = tuple(tuple(x + o for x, o in zip(s, offset)) for s in self.sites)
        return Volume(self.dim, moved, self.label)

    def to_json(self) -> dict:
        return {"dim": self.dim, "sites": [list(s) for s in self.sites], "label": self.label}

    @staticmethod
    def from_json(obj: dict) -> "Volume":
        return Volume(obj["dim"], tuple(tuple(s) for s in obj["sites"]), obj.get("label", ""))


def build_box(dims: tuple[int, ...], label: str = "") -> Volume:
    """Axis-aligned box {x : 0 <= x_j <= dims_j - 1}."""
    d = len(dims)
    _check_dim(d)
    if any(n < 1 for n in dims):
        raise LatticeError(f"box extents must be >= 1, got {dims}")
    sites = [()]
    for n in dims:
        sites = [s + (x,) for s in sites for x in range(n)]
    return Volume(d, tuple(sites), label or "box:" + "x".join(map(str, dims)))


def edges(v: Volume) -> list[Edge]:
    """All ordered nearest-neighbor pairs (x, x+e_j) inside v."""
    out = []
    for s in v.sites:
        for j in range(v.dim):
            head = list(s)
            head[j] += 1
            if tuple(head) in v:
                out.append(Edge(s, j))
    return out


def is_connected(v: Volume) -> bool:
    """True iff the nearest-neighbor graph on v is connected (BFS)."""
    if len(v) <= 1:
        return True
    seen = {v.sites[0]}
    queue = deque([v.sites[0]])
    while queue:
        s = queue.popleft()
        for j in range(v.dim):
            for step in (1, -1):
                nb = list(s)
                nb[j] += step
                nb = tuple(nb)
                if nb in v and nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
    return len(seen) == len(v)


def boundary_sites(inner: Volume, ambient: Volume) -> list[Site]:
    """Sites of inner with at least one ambient neighbor outside inner."""
    if not inner.issubset(ambient):
        raise LatticeError("inner volume is not a subset of the ambient volume")
    out = []
    for s in inner.sites:
        for j in range(inner.dim):
            for step in (1, -1):
                nb = list(s)
                nb[j] += step
                nb = tuple(nb)
                if nb in ambient and nb not in inner:
                    out.append(s)
                    break
            else:
                continue
            break
    return out


def boundary_edges(inner: Volume, ambient: Volume) -> list[Edge]:
    """Edges of ambient with exactly one endpoint in inner."""
    if not inner.issubset(ambient):
        raise LatticeError("inner volume is not a subset of the ambient volume")
    return [
        e
        for e in edges(ambient)
        if (e.base in inner) != (e.head in inner)
    ]


# --- tilted constructions -------------------------------------------------
#
# Case 1 volumes: {x : 0 <= v.x <= L_1 - 1, 0 <= x_j <= L_j - 1 for j >= 2}
# with v = (1, v2, ..., vd).
# Case 2 volumes: {x : 0 <= v.x <= L_1 - 1/2, 0 <= w.x <= L_2 - 1/2,
# 0 <= x_j <= L_j - 1 for j >= 3} with v = (1/2, 1/2, v3, ...),
# w = (-1/2, 1/2, 0, ...). Membership is decided on inequalities scaled
# by 2, in integer arithmetic, to avoid boundary misclassification.


def build_tilted_case1(v_tail: tuple[int, ...], L: tuple[int, ...],
                       lower: int = 0, label: str = "") -> Volume:
    """Case-1 parallelepiped with tilt vector v = (1, *v_tail).

    ``lower`` shifts the first constraint to lower <= v.x <= L_1 - 1,
    which is how slabs in the sweep-1 direction are cut.
    """
    d = len(L)
    _check_dim(d)
    if len(v_tail) != d - 1:
        raise LatticeError("tilt vector length must be d - 1")
    if any(n < 1 for n in L):
        raise LatticeError(f"extents must be >= 1, got {L}")
    if any(t < 0 for t in v_tail):
        raise LatticeError("tilt entries must be nonnegative")
    sites = []
    tails = [()]
    for n in L[1:]:
        tails = [t + (x,) for t in tails for x in range(n)]
    for tail in tails:
        shift = sum(vt * x for vt, x in zip(v_tail, tail))
        for vx in range(lower, L[0]):
            sites.append((vx - shift,) + tail)
    return Volume(d, tuple(sites), label)


def build_tilted_case2(v_tail: tuple[int, ...], L: tuple[int, ...],
                       lower1: int = 0, lower2: int = 0, label: str = "") -> Volume:
    """Case-2 diamond parallelepiped.

    Constraints (scaled by 2, all integer):
      2*lower1 <= x1 + x2 + 2*sum(v(j) x_j) <= 2 L_1 - 1
      2*lower2 <= -x1 + x2               <= 2 L_2 - 1
      0 <= x_j <= L_j - 1  for j >= 3
    """
    d = len(L)
    _check_dim(d)
    if d < 2:
        raise LatticeError("Case-2 volumes need d >= 2")
    if len(v_tail) != d - 2:
        raise LatticeError("tilt vector length must be d - 2")
    if any(n < 1 for n in L):
        raise LatticeError(f"extents must be >= 1, got {L}")
    sites = []
    tails = [()]
    for n in L[2:]:
        tails = [t + (x,) for t in tails for x in range(n)]
    for tail in tails:
        shift = 2 * sum(vt * x for vt, x in zip(v_tail, tail))
        # s = x1 + x2 ranges so that 2 v.x = s + shift is in bounds
        for s in range(2 * lower1 - shift, 2 * L[0] - shift):
            for t in range(2 * lower2, 2 * L[1]):
                if (s + t) % 2:
                    continue
                x2 = (s + t) // 2
                x1 = (s - t) // 2
                sites.append((x1, x2) + tail)
    return Volume(d, tuple(sites), label)


@dataclass(frozen=True)
class VolumeFamilySpec:
    """Sweep family Lambda^(j)_n: extents with the j-th replaced by n.

    ``tilt`` is a model.TiltScheme. Cuts m/n select the slab
    Lambda^(j)_n \\ Lambda^(j)_m.
    """

    tilt: object
    extents: tuple[int, ...]
    sweep: int  # 0-based coordinate index
    upper_cut: int
    lower_cut: int = 0

    def __post_init__(self):
        if not 0 <= self.lower_cut <= self.upper_cut:
            raise LatticeError(
                f"need 0 <= m <= n, got m={self.lower_cut}, n={self.upper_cut}")
        if not 0 <= self.sweep < len(self.extents):
            raise LatticeError("sweep direction out of range")

    def member(self, n: int) -> Volume:
        """The family volume with the sweep extent set to n (empty when n=0)."""
        ext = list(self.extents)
        ext[self.sweep] = n
        if n == 0:
            return Volume(len(ext), (), "empty")
        t = self.tilt
        if t.case == 1:
            return build_tilted_case1(t.v, tuple(ext))
        return build_tilted_case2(t.v, tuple(ext))


def slab(spec: VolumeFamilySpec) -> Volume:
    """Lambda^(j)_n \\ Lambda^(j)_m as an explicit set difference."""
    n, m = spec.upper_cut, spec.lower_cut
    if m == n:
        return Volume(len(spec.extents), (), "empty")
    return spec.member(n).difference(spec.member(m))
