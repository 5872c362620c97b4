"""Exact square packing in the ``d x d`` grid.

Boxes are axis-aligned squares at integer slots, 1-based ``(row, col)`` of the
top-left slot.  In *symmetric* mode a box may sit off the diagonal only if the
transposed position can hold a twin of the same size; twins that are not part
of the input are reported as ``phantoms``.  A box equal to its own transpose
must have ``row == col``.

:func:`solve_general` and :func:`solve_symmetric` are bitmask backtracking
searches; :func:`brute_force_oracle` enumerates placement tuples naively and
is meant for cross-checking them on small grids.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from html import escape
from typing import Iterable, Sequence

from .errors import SizeGuard
from .rank_catalog import RankVector

__all__ = [
    "Placement",
    "Formation",
    "formation_problems",
    "solve_general",
    "solve_symmetric",
    "solve",
    "brute_force_oracle",
    "render",
    "parse_text",
    "formation_to_dict",
    "formation_from_dict",
]

FREE = "·"
_LABELS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789#$%&*+=@?!<>^~"
_PHANTOM_LABELS = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True, order=True)
class Placement:
    size: int
    row: int
    col: int

    def slots(self) -> set[tuple[int, int]]:
        return {
            (self.row + i, self.col + j) for i in range(self.size) for j in range(self.size)
        }

    def transpose(self) -> "Placement":
        return Placement(self.size, self.col, self.row)

    @property
    def on_diagonal(self) -> bool:
        return self.row == self.col

    def fits(self, dim: int) -> bool:
        return (
            self.size >= 1
            and self.row >= 1
            and self.col >= 1
            and self.row + self.size - 1 <= dim
            and self.col + self.size - 1 <= dim
        )


@dataclass(frozen=True)
class Formation:
    dim: int
    placements: tuple[Placement, ...]
    phantoms: tuple[Placement, ...] = field(default=())

    def sizes(self) -> list[int]:
        return [p.size for p in self.placements]

    def occupied(self) -> set[tuple[int, int]]:
        out: set[tuple[int, int]] = set()
        for p in self.placements + self.phantoms:
            out |= p.slots()
        return out

    def materialized(self) -> "Formation":
        """Phantom twins turned into real boxes."""
        return Formation(self.dim, self.placements + self.phantoms, ())


def formation_problems(formation: Formation, symmetric: bool = False) -> list[str]:
    """Independent check of the formation invariants; empty list when valid."""
    d = formation.dim
    problems = []
    boxes = list(formation.placements) + list(formation.phantoms)
    for p in boxes:
        if not p.fits(d):
            problems.append(f"{p} does not fit in the {d}x{d} grid")
    seen: dict[tuple[int, int], Placement] = {}
    for p in boxes:
        for slot in p.slots():
            if slot in seen:
                problems.append(f"{p} overlaps {seen[slot]} at slot {slot}")
                break
            seen[slot] = p
    if formation.phantoms and not symmetric:
        problems.append("phantom boxes are only meaningful in symmetric mode")
    if symmetric:
        real = list(formation.placements)
        for ph in formation.phantoms:
            if ph.transpose() not in real:
                problems.append(f"phantom {ph} is not the twin of any placement")
        for p in boxes:
            if p.on_diagonal:
                continue
            twins = [q for q in boxes if q == p.transpose()]
            if len(twins) != 1:
                problems.append(f"{p} has {len(twins)} transposed twins, expected 1")
    return problems


# --- bitmask search -------------------------------------------------------


def _mask(size: int, row: int, col: int, dim: int) -> int:
    # 0-based row/col
    line = ((1 << size) - 1) << col
    out = 0
    for i in range(row, row + size):
        out |= line << (i * dim)
    return out


def _positions(size: int, dim: int) -> list[tuple[int, int]]:
    return [(r, c) for r in range(dim - size + 1) for c in range(dim - size + 1)]


def _box_sizes(vec: RankVector) -> list[int]:
    return sorted(vec.ranks, reverse=True)


def _fill_pads_general(dim: int, occupied: set, pad: int) -> list[Placement]:
    free = [(r, c) for r in range(1, dim + 1) for c in range(1, dim + 1) if (r, c) not in occupied]
    return [Placement(1, r, c) for r, c in free[:pad]]


def _fill_pads_symmetric(dim: int, occupied: set, pad: int):
    pads, phantoms = [], []
    diag = [(r, r) for r in range(1, dim + 1) if (r, r) not in occupied]
    for r, c in diag:
        if len(pads) == pad:
            return pads, phantoms
        pads.append(Placement(1, r, c))
    for r in range(1, dim + 1):
        for c in range(r + 1, dim + 1):
            if (r, c) in occupied:
                continue
            left = pad - len(pads)
            if left <= 0:
                return pads, phantoms
            pads.append(Placement(1, r, c))
            if left >= 2:
                pads.append(Placement(1, c, r))
            else:
                phantoms.append(Placement(1, c, r))
    return pads, phantoms


def solve_general(vec: RankVector, pad: int | None = None) -> Formation | None:
    """Place every box of ``vec`` without overlap, or prove that impossible.

    Rank-1 pads only need free slots, so they are checked by area and then
    assigned to the first free slots in row-major order.
    """
    pad = vec.rank1_pad if pad is None else pad
    d = vec.dim
    sizes = _box_sizes(vec)
    if sum(m * m for m in sizes) + pad > d * d:
        return None
    masks = {m: [(_mask(m, r, c, d), r, c) for r, c in _positions(m, d)] for m in set(sizes)}
    n = len(sizes)
    remaining = [sum(m * m for m in sizes[i:]) for i in range(n + 1)]
    full = d * d
    chosen: list[tuple[int, int]] = []

    def rec(i: int, occ: int, last: int) -> bool:
        if i == n:
            return True
        if full - occ.bit_count() < remaining[i]:
            return False
        m = sizes[i]
        start = last + 1 if i > 0 and sizes[i - 1] == m else 0
        for k in range(start, len(masks[m])):
            mk, r, c = masks[m][k]
            if occ & mk:
                continue
            chosen.append((r, c))
            if rec(i + 1, occ | mk, k):
                return True
            chosen.pop()
        return False

    if not rec(0, 0, -1):
        return None
    placements = tuple(Placement(m, r + 1, c + 1) for m, (r, c) in zip(sizes, chosen))
    occupied = set().union(*(p.slots() for p in placements)) if placements else set()
    return Formation(d, placements + tuple(_fill_pads_general(d, occupied, pad)))


def solve_symmetric(vec: RankVector, pad: int | None = None) -> Formation | None:
    """Search for a placement that completes to a diagonal-symmetric formation.

    Off-diagonal boxes reserve their transposed position; a later box of the
    same size may claim that reservation, otherwise it is reported as a
    phantom.  Pads must fit in the slots left free by boxes and phantoms.
    """
    pad = vec.rank1_pad if pad is None else pad
    d = vec.dim
    sizes = _box_sizes(vec)
    if sum(m * m for m in sizes) + pad > d * d:
        return None
    pos = {m: _positions(m, d) for m in set(sizes)}
    n = len(sizes)
    remaining = [sum(m * m for m in sizes[i:]) for i in range(n + 1)]
    full = d * d
    chosen: list[tuple[int, int]] = []
    result: list[frozenset] = []

    def rec(i: int, occ: int, phantoms: frozenset, last: int) -> bool:
        free = full - occ.bit_count()
        if i == n:
            if free >= pad:
                result.append(phantoms)
                return True
            return False
        m = sizes[i]
        claimable = sum(q * q for (q, _, _) in phantoms)
        if free + claimable < remaining[i]:
            return False
        start = last + 1 if i > 0 and sizes[i - 1] == m else 0
        for k in range(start, len(pos[m])):
            r, c = pos[m][k]
            if (m, r, c) in phantoms:
                chosen.append((r, c))
                if rec(i + 1, occ, phantoms - {(m, r, c)}, k):
                    return True
                chosen.pop()
                continue
            mk = _mask(m, r, c, d)
            if occ & mk:
                continue
            if r == c:
                nxt, ph = occ | mk, phantoms
            else:
                mt = _mask(m, c, r, d)
                if (occ | mk) & mt:
                    continue
                nxt, ph = occ | mk | mt, phantoms | {(m, c, r)}
            chosen.append((r, c))
            if rec(i + 1, nxt, ph, k):
                return True
            chosen.pop()
        return False

    if not rec(0, 0, frozenset(), -1):
        return None
    placements = tuple(Placement(m, r + 1, c + 1) for m, (r, c) in zip(sizes, chosen))
    phantoms = tuple(sorted(Placement(m, r + 1, c + 1) for m, r, c in result[0]))
    occupied = set().union(*(p.slots() for p in placements + phantoms)) if sizes else set()
    pads, pad_phantoms = _fill_pads_symmetric(d, occupied, pad)
    return Formation(d, placements + tuple(pads), phantoms + tuple(pad_phantoms))


def solve(vec: RankVector, pad: int | None = None, symmetric: bool = False) -> Formation | None:
    return solve_symmetric(vec, pad) if symmetric else solve_general(vec, pad)


# --- naive oracle ---------------------------------------------------------


def _oracle_accepts(dim: int, boxes: Sequence[Placement], pad: int, symmetric: bool):
    closure = list(boxes)
    if symmetric:
        for b in boxes:
            t = b.transpose()
            if t not in closure:
                closure.append(t)
    covered: set[tuple[int, int]] = set()
    for b in closure:
        s = b.slots()
        if covered & s:
            return None
        covered |= s
    if dim * dim - len(covered) < pad:
        return None
    return closure[len(boxes):]


def brute_force_oracle(vec: RankVector, pad: int | None = None, mode: str = "general") -> Formation | None:
    """Enumerate all placement tuples (lexicographically) and test each one.

    Equal boxes are enumerated as position combinations.  Only the overlap
    and transposition predicates are used; nothing is pruned.
    """
    if mode not in ("general", "symmetric"):
        raise ValueError(f"mode must be 'general' or 'symmetric', got {mode!r}")
    if vec.dim > 6:
        raise SizeGuard(f"brute-force oracle is limited to d <= 6, got d = {vec.dim}")
    pad = vec.rank1_pad if pad is None else pad
    d = vec.dim
    symmetric = mode == "symmetric"
    groups = [(m, len(list(g))) for m, g in itertools.groupby(sorted(vec.ranks, reverse=True))]
    choices = []
    for m, count in groups:
        cells = [(r, c) for r in range(1, d - m + 2) for c in range(1, d - m + 2)]
        choices.append([tuple(Placement(m, r, c) for r, c in combo)
                        for combo in itertools.combinations(cells, count)])
    for pick in itertools.product(*choices):
        boxes = [b for group in pick for b in group]
        phantoms = _oracle_accepts(d, boxes, pad, symmetric)
        if phantoms is None:
            continue
        occupied = set().union(*(b.slots() for b in boxes + phantoms)) if boxes else set()
        if symmetric:
            pads, pad_ph = _fill_pads_symmetric(d, occupied, pad)
            return Formation(d, tuple(boxes + pads), tuple(phantoms + pad_ph))
        return Formation(d, tuple(boxes + _fill_pads_general(d, occupied, pad)))
    return None


# --- rendering and serialisation ------------------------------------------


def _labels(formation: Formation) -> tuple[list[str], list[str]]:
    if len(formation.placements) > len(_LABELS) or len(formation.phantoms) > len(_PHANTOM_LABELS):
        raise ValueError("too many boxes to label")
    return (list(_LABELS[: len(formation.placements)]),
            list(_PHANTOM_LABELS[: len(formation.phantoms)]))


def _text(formation: Formation) -> str:
    d = formation.dim
    grid = [[FREE] * d for _ in range(d)]
    real, ghost = _labels(formation)
    for label, box in zip(real + ghost, formation.placements + formation.phantoms):
        for r, c in box.slots():
            grid[r - 1][c - 1] = label
    return "\n".join(" ".join(row) for row in grid) + "\n"


_COLORS = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
           "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"]


def _svg(formation: Formation, cell: int = 40) -> str:
    d = formation.dim
    side = d * cell
    m = 10
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{side + 2 * m}" '
        f'height="{side + 2 * m}" viewBox="0 0 {side + 2 * m} {side + 2 * m}">',
        f'<rect x="{m}" y="{m}" width="{side}" height="{side}" fill="white" stroke="black" stroke-width="2"/>',
    ]
    for i in range(1, d):
        out.append(f'<line x1="{m + i * cell}" y1="{m}" x2="{m + i * cell}" y2="{m + side}" stroke="#dddddd"/>')
        out.append(f'<line x1="{m}" y1="{m + i * cell}" x2="{m + side}" y2="{m + i * cell}" stroke="#dddddd"/>')
    real, ghost = _labels(formation)
    for k, (label, box) in enumerate(zip(real, formation.placements)):
        x, y, w = m + (box.col - 1) * cell, m + (box.row - 1) * cell, box.size * cell
        out.append(
            f'<rect x="{x + 2}" y="{y + 2}" width="{w - 4}" height="{w - 4}" '
            f'fill="{_COLORS[k % len(_COLORS)]}" fill-opacity="0.6" stroke="black"/>'
        )
        out.append(
            f'<text x="{x + w / 2}" y="{y + w / 2 + 5}" text-anchor="middle" '
            f'font-family="monospace" font-size="14">{escape(label)}</text>'
        )
    for label, box in zip(ghost, formation.phantoms):
        x, y, w = m + (box.col - 1) * cell, m + (box.row - 1) * cell, box.size * cell
        out.append(
            f'<rect x="{x + 2}" y="{y + 2}" width="{w - 4}" height="{w - 4}" fill="none" '
            f'stroke="black" stroke-dasharray="6,4"/>'
        )
        out.append(
            f'<text x="{x + w / 2}" y="{y + w / 2 + 5}" text-anchor="middle" '
            f'font-family="monospace" font-size="14" fill="#666666">{escape(label)}</text>'
        )
    out.append(f'<line x1="{m}" y1="{m}" x2="{m + side}" y2="{m + side}" stroke="red" stroke-width="1.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render(formation: Formation, fmt: str = "text") -> str:
    """Draw a formation as a character grid (``text``) or a standalone ``svg``.

    In text mode real boxes get upper-case/digit labels, phantom twins
    lower-case ones, and free slots are ``FREE``.
    """
    if fmt == "text":
        return _text(formation)
    if fmt == "svg":
        return _svg(formation)
    raise ValueError(f"unknown render format {fmt!r}")


def parse_text(text: str) -> Formation:
    """Inverse of ``render(..., "text")``."""
    rows = [line.split() for line in text.strip("\n").splitlines() if line.strip()]
    d = len(rows)
    if any(len(r) != d for r in rows):
        raise ValueError("grid is not square")
    cells: dict[str, list[tuple[int, int]]] = {}
    for i, row in enumerate(rows, start=1):
        for j, ch in enumerate(row, start=1):
            if ch != FREE:
                cells.setdefault(ch, []).append((i, j))
    real, ghost = {}, {}
    for ch, slots in cells.items():
        r0 = min(r for r, _ in slots)
        c0 = min(c for _, c in slots)
        size = max(r for r, _ in slots) - r0 + 1
        box = Placement(size, r0, c0)
        if box.slots() != set(slots):
            raise ValueError(f"label {ch!r} does not cover a square")
        if ch in _PHANTOM_LABELS:
            ghost[_PHANTOM_LABELS.index(ch)] = box
        elif ch in _LABELS:
            real[_LABELS.index(ch)] = box
        else:
            raise ValueError(f"unknown label {ch!r}")
    return Formation(d, tuple(real[k] for k in sorted(real)), tuple(ghost[k] for k in sorted(ghost)))


def _boxes_to_json(boxes: Iterable[Placement]) -> list[dict]:
    return [{"size": b.size, "row": b.row, "col": b.col} for b in boxes]


def formation_to_dict(formation: Formation) -> dict:
    return {
        "dim": formation.dim,
        "boxes": _boxes_to_json(formation.placements),
        "phantoms": _boxes_to_json(formation.phantoms),
    }


def formation_from_dict(doc: dict) -> Formation:
    def boxes(key):
        return tuple(Placement(int(b["size"]), int(b["row"]), int(b["col"])) for b in doc.get(key, []))

    return Formation(int(doc["dim"]), boxes("boxes"), boxes("phantoms"))
