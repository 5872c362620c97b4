"""Transformations that map extreme POVMs to new extreme POVMs.

Each function takes a validated :class:`~extreme_povm.operator_core.Povm` and
returns a new one; the rank bookkeeping of the output is exact (see the
individual docstrings).  Random choices go through ``numpy.random.Generator``
so results are reproducible for a given seed.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import (
    BadPartition,
    CannotComplete,
    InvalidOutcomeCount,
    NotExtreme,
    PreconditionError,
    RankBudgetExhausted,
)
from .extremality import check_extreme_c
from .operator_core import (
    DEFAULT,
    Povm,
    Tolerances,
    conjugate_renormalize,
    embed,
    projector,
    spectral_decompose,
    validate_povm,
)

__all__ = [
    "pvm",
    "trivial_povm",
    "complement_direction",
    "add_rank1",
    "rank1_chain",
    "delete_outcome",
    "refine",
    "multiply_ranks",
    "increase_rank",
    "lift_dimension",
]

_RESIDUAL_MIN = 1e-6
_MAX_DRAWS = 8


def pvm(partition: Sequence[int], tol: Tolerances = DEFAULT) -> Povm:
    """Projections onto consecutive blocks of standard basis vectors."""
    if not partition or any(int(m) < 1 for m in partition):
        raise PreconditionError(f"partition must be positive integers, got {partition!r}")
    d = int(sum(partition))
    effects, start = [], 0
    for m in partition:
        p = np.zeros((d, d))
        p[start : start + m, start : start + m] = np.eye(m)
        effects.append(p)
        start += m
    return validate_povm(effects, d, tol=tol)


def trivial_povm(dim: int, tol: Tolerances = DEFAULT) -> Povm:
    return pvm([dim], tol=tol)


def _require_extreme(povm: Povm, tol: Tolerances) -> None:
    if not check_extreme_c(povm, tol, witness=False).is_extreme:
        raise NotExtreme("operation requires an extreme POVM")


def _span_basis(vectors: Sequence[np.ndarray], dim: int, tol: Tolerances) -> np.ndarray:
    """Orthonormal basis (as columns) of span{|f_k><f_l|} over all blocks."""
    cols = []
    for f in vectors:
        for k in range(f.shape[1]):
            for l in range(f.shape[1]):
                cols.append(np.outer(f[:, k], f[:, l].conj()).ravel())
    if not cols:
        return np.zeros((dim * dim, 0), dtype=np.complex128)
    u, s, _ = np.linalg.svd(np.array(cols).T, full_matrices=False)
    rank = int(np.count_nonzero(s > tol.rank * s[0])) if s.size and s[0] > 0 else 0
    return u[:, :rank]


def complement_direction(
    vectors: Sequence[np.ndarray], dim: int, rng: np.random.Generator, tol: Tolerances = DEFAULT
) -> np.ndarray:
    """A unit vector ``eta`` with ``|eta><eta|`` outside span{|f_k><f_l|}.

    A random Hermitian matrix is projected onto the orthogonal complement of
    the span; the residual is again Hermitian, and its eigenvectors are tried
    in order of decreasing |eigenvalue| until one whose projector leaves the
    span is found.
    """
    q = _span_basis(vectors, dim, tol)
    for _ in range(_MAX_DRAWS):
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = ((g + g.conj().T) / 2).ravel()
        resid = h - q @ (q.conj().T @ h)
        if np.linalg.norm(resid) < _RESIDUAL_MIN:
            continue
        r = resid.reshape(dim, dim)
        w, v = np.linalg.eigh((r + r.conj().T) / 2)
        for i in np.argsort(-np.abs(w), kind="stable"):
            eta = v[:, i]
            p = projector(eta).ravel()
            if np.linalg.norm(p - q @ (q.conj().T @ p)) > _RESIDUAL_MIN:
                return eta
    raise RankBudgetExhausted(
        f"no rank-1 operator outside the operator span found in {_MAX_DRAWS} draws"
    )


def add_rank1(povm: Povm, seed=0, tol: Tolerances | None = None) -> Povm:
    """Append one rank-1 outcome and renormalise by ``(I + |eta><eta|)^{-1/2}``.

    Requires ``sum r_j^2 < d^2``.  Ranks of the existing outcomes are kept and
    the new outcome has rank 1; extremality carries over.
    """
    tol = tol or povm.tol
    d = povm.dim
    if sum(r * r for r in povm.ranks) >= d * d:
        raise RankBudgetExhausted(
            f"sum of squared ranks {sum(r * r for r in povm.ranks)} already equals d^2 = {d * d}"
        )
    rng = np.random.default_rng(seed)
    spec = spectral_decompose(povm, tol)
    eta = complement_direction(spec.vectors, d, rng, tol)
    return conjugate_renormalize(list(povm.effects) + [projector(eta)], d, tol=tol)


def rank1_chain(dim: int, n_outcomes: int, seed=0, tol: Tolerances = DEFAULT) -> Povm:
    """Extreme rank-1 POVM with ``n_outcomes`` outcomes, ``dim <= n_outcomes <= dim^2``."""
    if not dim <= n_outcomes <= dim * dim:
        raise InvalidOutcomeCount(
            f"need {dim} <= N <= {dim * dim} outcomes for d = {dim}, got {n_outcomes}"
        )
    rng = np.random.default_rng(seed)
    out = pvm([1] * dim, tol=tol)
    for _ in range(n_outcomes - dim):
        out = add_rank1(out, rng, tol)
    return out


def delete_outcome(povm: Povm, h: int, seed=0, tol: Tolerances | None = None) -> Povm:
    """Remove outcome ``h`` (0-based) and renormalise the rest.

    If ``I - M_h`` is singular, rank-1 outcomes drawn outside the remaining
    operator span are appended one at a time until the sum is invertible.
    Surviving outcomes keep their order and ranks; pads come last.
    """
    tol = tol or povm.tol
    n = povm.n_outcomes
    if n < 2:
        raise PreconditionError("cannot delete from a single-outcome POVM")
    if not 0 <= h < n:
        raise PreconditionError(f"outcome index {h} out of range for {n} outcomes")
    _require_extreme(povm, tol)
    d = povm.dim
    rest = [m for j, m in enumerate(povm.effects) if j != h]
    total = np.sum(rest, axis=0)
    if np.linalg.eigvalsh(total).min() > tol.inv:
        return conjugate_renormalize(rest, d, tol=tol)
    rng = np.random.default_rng(seed)
    spec = spectral_decompose(povm, tol)
    vectors = [f for j, f in enumerate(spec.vectors) if j != h]
    pads = []
    for _ in range(d):
        eta = complement_direction(vectors, d, rng, tol)
        pads.append(projector(eta))
        vectors.append(eta.reshape(d, 1))
        total = total + pads[-1]
        if np.linalg.eigvalsh(total).min() > tol.inv:
            return conjugate_renormalize(rest + pads, d, tol=tol)
    raise CannotComplete(f"sum still singular after {d} rank-1 pads")


def refine(povm: Povm, partition: Sequence[Sequence[int]], tol: Tolerances | None = None) -> Povm:
    """Split every effect into groups of consecutive spectral terms.

    ``partition[j]`` lists positive group sizes summing to the rank of effect
    ``j``; outcome ``j`` is replaced in place by one outcome per group.
    """
    tol = tol or povm.tol
    if len(partition) != povm.n_outcomes:
        raise BadPartition(
            f"partition has {len(partition)} entries for {povm.n_outcomes} outcomes"
        )
    for j, (parts, r) in enumerate(zip(partition, povm.ranks)):
        if any(int(p) < 1 for p in parts) or sum(parts) != r:
            raise BadPartition(f"parts {list(parts)} of outcome {j} must be positive and sum to {r}")
    _require_extreme(povm, tol)
    spec = spectral_decompose(povm, tol)
    effects = []
    for f, parts in zip(spec.vectors, partition):
        start = 0
        for p in parts:
            g = f[:, start : start + p]
            effects.append(g @ g.conj().T)
            start += p
    return validate_povm(effects, povm.dim, tol=tol)


def multiply_ranks(povm: Povm, factor: int, tol: Tolerances | None = None) -> Povm:
    """``M_j (x) I_A`` on ``C^d (x) C^A``: every rank is multiplied by ``A``."""
    tol = tol or povm.tol
    if int(factor) != factor or factor < 1:
        raise PreconditionError(f"factor must be a positive integer, got {factor!r}")
    _require_extreme(povm, tol)
    eye = np.eye(int(factor))
    return validate_povm([np.kron(m, eye) for m in povm.effects], povm.dim * int(factor), tol=tol)


def increase_rank(povm: Povm, h: int, tol: Tolerances | None = None) -> Povm:
    """Embed into ``C^{d+1}`` and add the new basis projector to outcome ``h``."""
    tol = tol or povm.tol
    if not 0 <= h < povm.n_outcomes:
        raise PreconditionError(f"outcome index {h} out of range")
    _require_extreme(povm, tol)
    d = povm.dim + 1
    effects = [embed(m, d) for m in povm.effects]
    effects[h][d - 1, d - 1] += 1.0
    return validate_povm(effects, d, tol=tol)


def lift_dimension(povm: Povm, p: int, h: int = 0, tol: Tolerances | None = None) -> Povm:
    """Same canonical rank vector on ``C^{d+p}``.

    Raises the rank of outcome ``h`` ``p`` times, then refines it back into
    its original rank plus ``p`` rank-1 outcomes.
    """
    tol = tol or povm.tol
    if int(p) != p or p < 1:
        raise PreconditionError(f"p must be a positive integer, got {p!r}")
    original = povm.ranks[h]
    out = povm
    for _ in range(int(p)):
        out = increase_rank(out, h, tol)
    partition = [[r] if r else [] for r in out.ranks]
    partition[h] = ([original] if original else []) + [1] * int(p)
    return refine(out, partition, tol)
