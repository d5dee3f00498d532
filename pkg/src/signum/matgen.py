"""Seeded generators for the benchmark matrix families.

Randomness comes from NumPy's PCG64 (``numpy.random.default_rng(seed)``),
so a ``(family, params, seed)`` triple reproduces a matrix bit for bit.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence, Union

import numpy as np

from .sparse import (SparseMatrix, add, block, identity, lu_invert, matmul,
                     power_iteration_radius, transpose)

FAMILIES = ("rand_sparse", "rand_spd", "banded_kron", "are_pair", "network")

DISPERSION_LAMBDA = 1.0 / 16.0
ARE_B_STENCIL = (-1.6, 0.0, 0.8, 0.0, -1.6)
ARE_B_OFFSETS = (-2, -1, 0, 1, 2)
ARE_C_STENCIL = (1.0 / 16.0, 7.0 / 8.0, 1.0 / 16.0)
ARE_C_OFFSETS = (-1, 0, 1)


@dataclass
class GenSpec:
    """Serializable description of one generated matrix."""

    family: str
    n: int
    density: float = 0.01
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not 0.0 < self.density <= 1.0:
            raise ValueError("density must lie in (0, 1]")

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def build(self):
        p = dict(self.params)
        if self.family == "rand_sparse":
            return gen_rand_sparse(self.n, self.density, self.seed, shift=not p.get("raw", False))
        if self.family == "rand_spd":
            return gen_rand_spd(self.n, self.density, self.seed)
        if self.family == "banded_kron":
            return gen_banded(self.n, p.get("stencil", [DISPERSION_LAMBDA, 1 - 2 * DISPERSION_LAMBDA,
                                                      DISPERSION_LAMBDA]),
                              p.get("offsets", [-1, 0, 1]))
        if self.family == "are_pair":
            return gen_are_pair(self.n, self.seed, d_density=self.density)
        edges = gen_small_world_edges(self.n, p.get("k", 1), p.get("p", 0.0), self.seed)
        return gen_network_sign_input(edges, p.get("alpha", "auto"), n=self.n)


def _random_pattern(rng, nrows, ncols, count):
    """``count`` distinct positions drawn uniformly."""
    total = nrows * ncols
    count = min(count, total)
    if count > total // 4:
        flat = rng.choice(total, size=count, replace=False)
    else:
        flat = np.unique(rng.integers(0, total, size=count + count // 8 + 8))
        while flat.size < count:
            extra = rng.integers(0, total, size=count - flat.size + 8)
            flat = np.unique(np.r_[flat, extra])
        flat = rng.permutation(flat)[:count]
    return np.divmod(np.sort(flat), ncols)


def gen_rand_sparse(n: int, density: float, seed: int, shift: bool = True) -> SparseMatrix:
    """Uniform random pattern, ``U(0, 1)`` values, plus ``2 n density`` on the diagonal.

    ``shift=False`` returns the raw pattern matrix, whose eigenvalues can
    sit near the imaginary axis.
    """
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    rows, cols = _random_pattern(rng, n, n, int(round(density * n * n)))
    vals = rng.random(rows.size)
    a = SparseMatrix.from_coo(n, n, rows, cols, vals)
    if shift:
        a = add(a, identity(n), 1.0, 2.0 * n * density)
    return a


def gen_rand_spd(n: int, density: float, seed: int, min_eig: float = 0.1) -> SparseMatrix:
    """Symmetric, strictly diagonally dominant, ``lambda_min >= min_eig``.

    Off-diagonal pattern is symmetric with ``U(-1, 1)`` values; the diagonal
    is the absolute row sum plus ``min_eig`` (Gershgorin).
    """
    rng = np.random.default_rng(seed)
    pairs = int(round(density * n * (n - 1) / 2))
    upper = n * (n - 1) // 2
    pairs = min(pairs, upper)
    if pairs:
        r, c = _random_pattern(rng, n, n, min(n * n, 2 * pairs + n + 16))
        keep = np.flatnonzero(r < c)
        keep = np.sort(rng.permutation(keep)[:pairs])
        r, c = r[keep], c[keep]
    else:
        r = c = np.empty(0, dtype=np.int64)
    v = rng.uniform(-1.0, 1.0, size=r.size)
    rowsum = np.bincount(r, np.abs(v), minlength=n) + np.bincount(c, np.abs(v), minlength=n)
    idx = np.arange(n)
    return SparseMatrix.from_coo(n, n, np.r_[r, c, idx], np.r_[c, r, idx],
                                 np.r_[v, v, rowsum + min_eig])


def gen_banded(n: int, stencil: Sequence[float], offsets: Sequence[int]) -> SparseMatrix:
    """Toeplitz band: ``stencil[t]`` fills the whole diagonal ``offsets[t]``.

    Diagonals are truncated at the matrix edge (``spdiags`` on a
    ``kron(ones(n, 1), stencil)`` column block).
    """
    if len(stencil) != len(offsets):
        raise ValueError("stencil and offsets must have equal length")
    rows, cols, vals = [], [], []
    for v, d in zip(stencil, offsets):
        length = n - abs(d)
        if length <= 0 or v == 0.0:
            continue
        i = np.arange(length) + max(0, -d)
        rows.append(i)
        cols.append(i + d)
        vals.append(np.full(length, float(v)))
    if not rows:
        return SparseMatrix.from_coo(n, n, [], [], [])
    return SparseMatrix.from_coo(n, n, np.concatenate(rows), np.concatenate(cols),
                                 np.concatenate(vals))


def gen_dispersion(n: int, lam: float = DISPERSION_LAMBDA) -> SparseMatrix:
    """Tridiagonal ``[lam, 1 - 2 lam, lam]`` finite-difference matrix."""
    return gen_banded(n, [lam, 1.0 - 2.0 * lam, lam], [-1, 0, 1])


def sqrt_embedding(b: SparseMatrix) -> SparseMatrix:
    """``[[0, B], [I, 0]]``, whose sign holds ``B^{1/2}`` and ``B^{-1/2}``."""
    return block([[None, b], [identity(b.nrows), None]])


def gen_are_pair(n: int, seed: int, d_density: float = 0.01):
    """Riccati test problem: banded ``B``, ``C``; random SPD ``D``; ``Q = B D^-1 B^T``."""
    from .applications import AreProblem, symmetrize

    if n < 5:
        raise ValueError("are_pair needs n >= 5")
    b = gen_banded(n, ARE_B_STENCIL, ARE_B_OFFSETS)
    c = gen_banded(n, ARE_C_STENCIL, ARE_C_OFFSETS)
    d = gen_rand_spd(n, d_density, seed)
    q = symmetrize(matmul(matmul(b, lu_invert(d)), transpose(b)))
    return AreProblem(B=b, C=c, D=d, Q=q)


Edge = Union[tuple, list]


def gen_network_sign_input(edges: Sequence[Edge], alpha: Union[float, str] = "auto",
                           n: int | None = None, seed: int = 0) -> SparseMatrix:
    """``I - alpha H`` for the 0/1 adjacency ``H`` of an undirected simple graph.

    With ``alpha="auto"``, ``alpha = 0.9 / rho(H)`` (power-iteration estimate),
    which makes the result symmetric positive definite.
    """
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    e = e[e[:, 0] != e[:, 1]]
    if e.size == 0:
        raise ValueError("graph has no edges")
    if n is None:
        n = int(e.max()) + 1
    lo, hi = np.minimum(e[:, 0], e[:, 1]), np.maximum(e[:, 0], e[:, 1])
    key = np.unique(lo * n + hi)
    lo, hi = np.divmod(key, n)
    h = SparseMatrix.from_coo(n, n, np.r_[lo, hi], np.r_[hi, lo], np.ones(2 * lo.size))
    if alpha == "auto":
        rho = power_iteration_radius(h, iters=200, seed=seed)
        alpha = 0.9 / rho
    return add(identity(n), h, 1.0, -float(alpha))


def gen_small_world_edges(n: int, k: int = 2, p: float = 0.05, seed: int = 0):
    """Ring lattice (each node joined to ``k`` neighbours per side) with a
    fraction ``p`` of edges rewired to uniform random targets."""
    rng = np.random.default_rng(seed)
    src = np.repeat(np.arange(n), k)
    dst = (src + np.tile(np.arange(1, k + 1), n)) % n
    rewire = rng.random(src.size) < p
    dst = dst.copy()
    dst[rewire] = rng.integers(0, n, size=int(rewire.sum()))
    edges = np.stack([src, dst], axis=1)
    return edges[edges[:, 0] != edges[:, 1]]
