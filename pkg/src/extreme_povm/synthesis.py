"""Extreme POVMs from diagonal-symmetric square packings.

Every slot ``(r, s)`` of the ``d x d`` grid carries a vector ``g_rs``::

    g_rs = |r> + |s>     if r > s
    g_rs = |r>           if r = s
    g_rs = |r> - i|s>    if r < s

A box contributes the slot vectors along its own diagonal.  For a symmetric
formation the resulting outer products are linearly independent, so after
renormalising by ``T^{-1/2}`` (``T`` the sum of all box operators) the effects
form an extreme POVM with one outcome per box and rank equal to the box side.
Indices are 1-based throughout.
"""
from __future__ import annotations

import numpy as np

from .constructions import delete_outcome
from .errors import CertificationFailed, NoSymmetricSolution, NotSymmetric
from .extremality import check_extreme_c
from .operator_core import DEFAULT, Povm, Tolerances, conjugate_renormalize
from .packing import Formation, Placement, formation_problems, solve_symmetric
from .rank_catalog import RankVector, canonicalize

__all__ = [
    "slot_vector",
    "slot_vector_table",
    "box_vectors",
    "twin_pair_rank",
    "pad_formation",
    "synthesize",
    "synthesize_vector",
]


def slot_vector(r: int, s: int, dim: int) -> np.ndarray:
    g = np.zeros(dim, dtype=np.complex128)
    g[r - 1] = 1.0
    if r > s:
        g[s - 1] = 1.0
    elif r < s:
        g[s - 1] = -1j
    return g


def slot_vector_table(dim: int) -> np.ndarray:
    """``table[r-1, s-1]`` is ``g_rs``; shape ``(d, d, d)``."""
    table = np.zeros((dim, dim, dim), dtype=np.complex128)
    for r in range(1, dim + 1):
        for s in range(1, dim + 1):
            table[r - 1, s - 1] = slot_vector(r, s, dim)
    return table


def box_vectors(box: Placement, dim: int) -> np.ndarray:
    """Columns ``h_k = g_{row+k-1, col+k-1}``, k = 1..size."""
    return np.stack(
        [slot_vector(box.row + k, box.col + k, dim) for k in range(box.size)], axis=1
    )


def _outer_columns(h: np.ndarray) -> list[np.ndarray]:
    m = h.shape[1]
    return [np.outer(h[:, k], h[:, l].conj()).ravel() for k in range(m) for l in range(m)]


def twin_pair_rank(size: int, row: int, col: int, dim: int, tol: Tolerances = DEFAULT) -> int:
    """Rank of the ``2 m^2`` outer products of a box and its transposed twin."""
    box = Placement(size, row, col)
    cols = _outer_columns(box_vectors(box, dim)) + _outer_columns(box_vectors(box.transpose(), dim))
    s = np.linalg.svd(np.array(cols).T, compute_uv=False)
    return int(np.count_nonzero(s > tol.rank * s[0]))


def _box_operator(box: Placement, dim: int) -> np.ndarray:
    h = box_vectors(box, dim)
    return h @ h.conj().T


def pad_formation(formation: Formation, tol: Tolerances = DEFAULT) -> Formation:
    """Add 1x1 boxes on free diagonal slots (ascending) until ``T`` is invertible."""
    d = formation.dim
    boxes = list(formation.placements)
    total = sum((_box_operator(b, d) for b in boxes), np.zeros((d, d), dtype=np.complex128))
    occupied = formation.occupied()
    for r in range(1, d + 1):
        if np.linalg.eigvalsh(total).min() > tol.inv:
            break
        if (r, r) in occupied:
            continue
        pad = Placement(1, r, r)
        boxes.append(pad)
        total = total + _box_operator(pad, d)
    if np.linalg.eigvalsh(total).min() <= tol.inv:
        raise CertificationFailed("box operators do not span C^d after diagonal padding")
    return Formation(d, tuple(boxes), formation.phantoms)


def synthesize(formation: Formation, strict: bool = True, tol: Tolerances = DEFAULT) -> Povm:
    """Certified extreme POVM with one outcome per box of a symmetric formation.

    With ``strict`` the formation must already be fully symmetric; otherwise
    phantom twins are materialised as real boxes first.  Outcomes follow the
    box order, then diagonal pads in ascending order.
    """
    if formation.phantoms:
        if strict:
            raise NotSymmetric("formation has phantom twins; materialise them or pass strict=False")
        formation = formation.materialized()
    problems = formation_problems(formation, symmetric=True)
    if problems:
        raise NotSymmetric("; ".join(problems))
    padded = pad_formation(formation, tol)
    d = formation.dim
    povm = conjugate_renormalize([_box_operator(b, d) for b in padded.placements], d, tol=tol)
    expected = tuple(b.size for b in padded.placements)
    if povm.ranks != expected:
        raise CertificationFailed(f"ranks {povm.ranks} differ from box sizes {expected}")
    verdict = check_extreme_c(povm, tol, witness=False)
    if not verdict.is_extreme:
        raise CertificationFailed(
            f"criterion matrix has rank {verdict.numerical_rank} < {verdict.gram_dim}"
        )
    return povm


def synthesize_vector(vec: RankVector, seed=0, tol: Tolerances = DEFAULT) -> Povm:
    """Solve the symmetric packing problem for ``vec`` and synthesise from it.

    Phantom twins are synthesised as real outcomes and then deleted one at a
    time, highest index first.  The first ``len(vec.ranks)`` outcomes carry the
    prescribed ranks in box order; everything after them has rank 1.
    """
    formation = solve_symmetric(vec.canonical(), pad=0)
    if formation is None:
        raise NoSymmetricSolution(f"symmetric packing problem for {vec} has no solution")
    n_real = len(formation.placements)
    n_phantom = len(formation.phantoms)
    povm = synthesize(formation.materialized(), tol=tol)
    rng = np.random.default_rng(seed)
    for h in range(n_real + n_phantom - 1, n_real - 1, -1):
        povm = delete_outcome(povm, h, rng, tol)
    got = canonicalize(povm.ranks, povm.dim)
    if got.canonical() != vec.canonical() or any(r != 1 for r in povm.ranks[n_real:]):
        raise CertificationFailed(f"synthesised ranks {povm.ranks} do not realise {vec}")
    if not check_extreme_c(povm, tol, witness=False).is_extreme:
        raise CertificationFailed("synthesised POVM failed the extremality check")
    return povm
