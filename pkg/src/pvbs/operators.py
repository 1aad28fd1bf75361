"""Sector Hamiltonians and matrix-free ground-space projector actions.

The two-site interaction blocks are 9x9 and conserve particle numbers, so
assembly restricted to a fixed-count sector is exact. Ground projectors
are never materialized: amplitudes are grouped by the configuration
outside the projected region and each interior block is projected onto
the four analytic ground vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import analytic, fock
from .lattice import Volume, edges, is_connected
from .model import Params

DEFAULT_ACTION_CAP = 3 ** 13
POWER_SEED = 0x5EED


class OperatorError(ValueError):
    pass


def edge_projection_block(lam_a: float, lam_b: float) -> np.ndarray:
    """Rank-5 projector on C^3 x C^3; pair basis index is 3*left + right."""
    if lam_a <= 0 or lam_b <= 0:
        raise OperatorError("edge parameters must be positive")
    h = np.zeros((9, 9))
    raw = [
        # (indices, coefficients): |0,a> - lam_a |a,0>, etc.
        ([1, 3], [1.0, -lam_a]),
        ([2, 6], [1.0, -lam_b]),
        ([5, 7], [lam_a, -lam_b]),
        ([4], [1.0]),
        ([8], [1.0]),
    ]
    for idx, coef in raw:
        u = np.zeros(9)
        u[idx] = coef
        h += np.outer(u, u) / (u @ u)
    return h


def edge_kernel_vectors(lam_a: float, lam_b: float) -> np.ndarray:
    """The four (normalized) kernel vectors of the edge projector, as rows."""
    raw = [
        ([0], [1.0]),
        ([1, 3], [lam_a, 1.0]),
        ([2, 6], [lam_b, 1.0]),
        ([5, 7], [lam_b, lam_a]),
    ]
    out = np.zeros((4, 9))
    for r, (idx, coef) in enumerate(raw):
        u = np.zeros(9)
        u[idx] = coef
        out[r] = u / np.linalg.norm(u)
    return out


def _block_columns(h: np.ndarray):
    """Per-column sparse structure of a 9x9 block: (rows, values) lists."""
    cols = []
    for c in range(9):
        rows = np.nonzero(np.abs(h[:, c]) > 0.0)[0]
        cols.append((rows, h[rows, c]))
    return cols


def assemble_sector_hamiltonian(v: Volume, p: Params,
                                basis: fock.SectorBasis) -> sp.csr_matrix:
    """H^v restricted to the particle-number sector of `basis`."""
    if basis.volume is not v and basis.volume != v:
        raise OperatorError("basis was not built on this volume")
    n = len(v)
    la = p.floats("a")
    lb = p.floats("b")
    blocks = {j: _block_columns(edge_projection_block(la[j], lb[j]))
              for j in range(v.dim)}
    site_pos = {s: i for i, s in enumerate(v.sites)}
    pow3 = [3 ** i for i in range(n)]

    rows, cols, vals = [], [], []
    for e in edges(v):
        i_base = site_pos[e.base]
        i_head = site_pos[e.head]
        col_struct = blocks[e.direction]
        for ci, code in enumerate(basis.states):
            dx = (code // pow3[i_base]) % 3
            dy = (code // pow3[i_head]) % 3
            pair = 3 * dx + dy
            qs, hvals = col_struct[pair]
            for q, hv in zip(qs, hvals):
                qx, qy = divmod(int(q), 3)
                new = code + (qx - dx) * pow3[i_base] + (qy - dy) * pow3[i_head]
                rows.append(basis.index_of(new))
                cols.append(ci)
                vals.append(hv)
    dim = basis.dim
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


@dataclass
class LinearOperatorAction:
    """Matrix-free symmetric operator: dim plus an apply contract."""

    dim: int
    apply: callable
    description: str = ""

    def __call__(self, vec: np.ndarray) -> np.ndarray:
        return self.apply(vec)


def _ground_sectors(inner: Volume, p: Params):
    """(indices, amplitudes) of the four analytic ground vectors on inner,
    indexed by base-3 codes over inner's canonical site order."""
    out = []
    for which, (na, nb) in (("vac", (0, 0)), ("a", (1, 0)),
                            ("b", (0, 1)), ("ab", (1, 1))):
        basis = fock.enumerate_sector(inner, na, nb)
        amp = analytic.ground_state_vector(inner, p, which, basis)
        out.append((np.asarray(basis.states, dtype=np.int64), amp))
    return out


def ground_projector_action(inner: Volume, p: Params, ambient: Volume,
                            cap: int = DEFAULT_ACTION_CAP) -> LinearOperatorAction:
    """Action of (ground projector of inner) x identity on H^ambient."""
    if not inner.issubset(ambient):
        raise OperatorError("inner volume is not contained in the ambient one")
    if len(inner) < 2 or not is_connected(inner):
        raise OperatorError("projector needs a connected inner volume with >= 2 sites")
    n_amb = len(ambient)
    dim = 3 ** n_amb
    if dim > cap:
        raise OperatorError(f"ambient dimension 3^{n_amb} exceeds cap {cap}")

    inner_set = set(inner.sites)
    inner_pos = [i for i, s in enumerate(ambient.sites) if s in inner_set]
    ext_pos = [i for i, s in enumerate(ambient.sites) if s not in inner_set]
    k = len(inner_pos)
    dim_in, dim_ext = 3 ** k, 3 ** len(ext_pos)

    idx = np.arange(dim, dtype=np.int64)
    inner_code = np.zeros(dim, dtype=np.int64)
    for a, pos in enumerate(inner_pos):
        inner_code += ((idx // 3 ** pos) % 3) * 3 ** a
    ext_code = np.zeros(dim, dtype=np.int64)
    for a, pos in enumerate(ext_pos):
        ext_code += ((idx // 3 ** pos) % 3) * 3 ** a
    perm = inner_code * dim_ext + ext_code
    sectors = _ground_sectors(inner, p)

    def apply(vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (dim,):
            raise OperatorError(f"expected vector of length {dim}")
        w = np.empty(dim)
        w[perm] = vec
        w = w.reshape(dim_in, dim_ext)
        out = np.zeros_like(w)
        for idxs, amp in sectors:
            coeff = amp @ w[idxs]  # overlap per exterior configuration
            out[idxs] += np.outer(amp, coeff)
        return out.reshape(-1)[perm]

    return LinearOperatorAction(
        dim, apply, f"G[{inner.label or len(inner)} sites] in 3^{n_amb}")


def en_projector_action(inner: Volume, outer: Volume, p: Params,
                        cap: int = DEFAULT_ACTION_CAP) -> LinearOperatorAction:
    """E_n = (G_inner x I) - G_outer on H^outer, for nested ground spaces."""
    g_small = ground_projector_action(inner, p, outer, cap)
    g_big = ground_projector_action(outer, p, outer, cap)

    def apply(vec: np.ndarray) -> np.ndarray:
        return g_small(vec) - g_big(vec)

    return LinearOperatorAction(g_small.dim, apply,
                                f"E[{len(inner)}->{len(outer)} sites]")


def operator_norm_of_product(a: LinearOperatorAction, b: LinearOperatorAction,
                             tol: float = 1e-8, seed: int = POWER_SEED,
                             max_iter: int = 5000) -> float:
    """Largest singular value of a . b via power iteration on b.a.b.

    Both actions must be symmetric; a must be idempotent (a projector),
    so that ||ab||^2 equals the top eigenvalue of b a b.
    """
    if a.dim != b.dim:
        raise OperatorError("operator dimensions do not match")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(a.dim)
    v /= np.linalg.norm(v)
    lam_prev = None
    for _ in range(max_iter):
        w = b(a(b(v)))
        lam = float(v @ w)
        nw = np.linalg.norm(w)
        if nw < 1e-290:
            return 0.0
        if abs(lam) < 1e-24:
            # below rounding noise of the applies: effectively zero
            return float(np.sqrt(max(lam, 0.0)))
        v = w / nw
        if lam_prev is not None and abs(lam - lam_prev) <= tol * max(abs(lam), 1e-30):
            return float(np.sqrt(max(lam, 0.0)))
        lam_prev = lam
    raise OperatorError(
        f"power iteration did not converge in {max_iter} steps "
        f"(last value {lam_prev})")


def materialize(action: LinearOperatorAction) -> np.ndarray:
    """Dense matrix of an action, for small-dimension oracle checks."""
    out = np.empty((action.dim, action.dim))
    basis_vec = np.zeros(action.dim)
    for i in range(action.dim):
        basis_vec[i] = 1.0
        out[:, i] = action(basis_vec)
        basis_vec[i] = 0.0
    return out


def dump_coordinates(op: sp.spmatrix) -> str:
    """Text dump of the operator in (row, col, value) coordinate format."""
    coo = op.tocoo()
    lines = [f"{r} {c} {v:.17g}" for r, c, v in
             sorted(zip(coo.row, coo.col, coo.data), key=lambda t: (t[0], t[1]))]
    return "\n".join(lines)
