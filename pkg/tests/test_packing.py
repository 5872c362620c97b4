
import pytest
from hypothesis import given
from hypothesis import strategies as st

from extreme_povm.errors import SizeGuard
from extreme_povm.packing import (
    Formation,
    Placement,
    brute_force_oracle,
    formation_from_dict,
    formation_problems,
    formation_to_dict,
    parse_text,
    render,
    solve,
    solve_general,
    solve_symmetric,
)
from extreme_povm.rank_catalog import RankVector, enumerate_candidates, parse_vector


def vec(text, d):
    return parse_vector(text, d)


def test_reference_cases():
    assert solve_general(vec("3,2_3", 5)) is not None
    assert solve_symmetric(vec("3,2_3", 5)) is not None
    assert solve_general(vec("3,2_4", 5)) is None
    assert solve_symmetric(vec("3,2_4", 5)) is None
    assert solve_general(vec("3_2,2_3", 6)) is not None
    assert solve_symmetric(vec("3_2,2_3", 6)) is None


def test_pvm_packings_sit_on_the_diagonal():
    for parts in ([3, 2], [2, 2, 1], [4]):
        v = RankVector(sum(parts), tuple(p for p in parts if p > 1), rank1_pad=parts.count(1))
        f = solve_symmetric(v)
        assert f is not None and not formation_problems(f, symmetric=True)


def test_symmetric_needs_phantoms_for_odd_offdiagonal_boxes():
    f = solve_symmetric(vec("4,2_2", 6), pad=0)
    assert f is not None and f.phantoms
    assert not formation_problems(f, symmetric=True)
    full = f.materialized()
    for b in full.placements:
        if not b.on_diagonal:
            assert b.transpose() in full.placements


def test_pad_is_checked_by_area():
    assert solve_general(vec("2", 2), pad=1) is None
    assert solve_general(vec("2", 3), pad=5) is not None
    assert solve_general(vec("2", 3), pad=6) is None


def test_validator_catches_overlap_and_bad_twin():
    overlap = Formation(3, (Placement(2, 1, 1), Placement(2, 2, 2)))
    assert formation_problems(overlap)
    lonely = Formation(3, (Placement(1, 1, 2),))
    assert not formation_problems(lonely)
    assert formation_problems(lonely, symmetric=True)
    outside = Formation(2, (Placement(2, 2, 1),))
    assert formation_problems(outside)


def test_oracle_size_guard():
    with pytest.raises(SizeGuard):
        brute_force_oracle(vec("2", 7))


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_oracle_agrees_with_pads(d):
    for v in enumerate_candidates(d):
        cap = d * d - sum(r * r for r in v.ranks)
        for pad in range(0, cap + 2):
            for mode in ("general", "symmetric"):
                a = solve(v, pad=pad, symmetric=mode == "symmetric")
                b = brute_force_oracle(v, pad=pad, mode=mode)
                assert (a is None) == (b is None), (str(v), pad, mode)
                if a is not None:
                    assert not formation_problems(a, symmetric=mode == "symmetric")


@given(st.integers(2, 6), st.lists(st.integers(2, 4), max_size=5))
def test_solutions_are_valid(d, sizes):
    sizes = sorted((s for s in sizes if s <= d), reverse=True)
    v = RankVector(d, tuple(sizes))
    for sym in (False, True):
        f = solve(v, pad=0, symmetric=sym)
        if f is not None:
            assert sorted(f.sizes(), reverse=True) == sizes
            assert not formation_problems(f, symmetric=sym)


def test_symmetric_solution_implies_general_solution():
    for d in range(2, 7):
        for v in enumerate_candidates(d):
            if solve_symmetric(v, pad=0) is not None:
                assert solve_general(v, pad=0) is not None


def test_text_render_round_trip():
    for text, d in (("3,2_3", 5), ("3,2", 5), ("3_2,2_6", 7)):
        f = solve_symmetric(vec(text, d), pad=0)
        g = parse_text(render(f))
        assert g == f


def test_svg_is_standalone():
    svg = render(solve_symmetric(vec("3,2", 5), pad=0), "svg")
    assert svg.startswith("<svg") and "xmlns" in svg and "href" not in svg
    assert "stroke-dasharray" in svg


def test_json_round_trip():
    f = solve_symmetric(vec("3,2", 5), pad=0)
    assert formation_from_dict(formation_to_dict(f)) == f
    assert set(formation_to_dict(f)) == {"dim", "boxes", "phantoms"}


def test_seven_dimensional_symmetric_packing():
    f = solve_symmetric(vec("3_2,2_6", 7), pad=0)
    assert f is not None and not f.phantoms
    assert not formation_problems(f, symmetric=True)
    singles = [b for b in f.placements if b.size == 2]
    pairs = {frozenset([(b.row, b.col), (b.col, b.row)]) for b in singles}
    assert len(pairs) == 3
