"""Minimal Naimark dilation built from the spectral vectors of each effect."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operator_core import Povm, Tolerances, spectral_decompose

__all__ = ["NaimarkDilation", "minimal_dilation"]


@dataclass(frozen=True)
class NaimarkDilation:
    """Isometry ``J: C^d -> C^D`` plus a block structure for the PVM.

    Row ``(j, k)`` of ``isometry`` is ``f_jk^dagger``; block ``j`` occupies
    ``block_sizes[j]`` consecutive coordinates of the dilation space.
    """

    dim: int
    block_sizes: tuple[int, ...]
    isometry: np.ndarray

    @property
    def dilation_dim(self) -> int:
        return int(sum(self.block_sizes))

    def block_slices(self) -> list[slice]:
        edges = np.concatenate([[0], np.cumsum(self.block_sizes)]).astype(int)
        return [slice(a, b) for a, b in zip(edges[:-1], edges[1:])]

    def projection(self, j: int) -> np.ndarray:
        p = np.zeros((self.dilation_dim, self.dilation_dim), dtype=np.complex128)
        s = self.block_slices()[j]
        p[s, s] = np.eye(s.stop - s.start)
        return p

    def compressed_effects(self) -> list[np.ndarray]:
        """``J^dagger P_j J`` for every block."""
        j = self.isometry
        return [j[s].conj().T @ j[s] for s in self.block_slices()]

    def isometry_defect(self) -> float:
        j = self.isometry
        return float(np.max(np.abs(j.conj().T @ j - np.eye(self.dim))))

    def minimality_rank(self, tol: Tolerances) -> int:
        """Rank of ``[P_1 J | ... | P_N J]``; equals ``dilation_dim`` iff minimal."""
        blocks = []
        for s in self.block_slices():
            pj = np.zeros_like(self.isometry)
            pj[s] = self.isometry[s]
            blocks.append(pj)
        stacked = np.hstack(blocks)
        sv = np.linalg.svd(stacked, compute_uv=False)
        if not sv.size or sv[0] == 0:
            return 0
        return int(np.count_nonzero(sv > tol.rank * sv[0]))


def minimal_dilation(povm: Povm, tol: Tolerances | None = None) -> NaimarkDilation:
    tol = tol or povm.tol
    spec = spectral_decompose(povm, tol)
    rows = [f.conj().T for f in spec.vectors]
    if any(r.shape[0] for r in rows):
        j = np.vstack(rows)
    else:
        j = np.zeros((0, povm.dim), dtype=np.complex128)
    j.setflags(write=False)
    return NaimarkDilation(dim=povm.dim, block_sizes=spec.ranks, isometry=j)
