import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wmgraph import (
    CodedSpace,
    StepFunction,
    ghp_upper_bound,
    pinched_matrix,
    tree_distance,
    write_matrix_csv,
)

H = StepFunction([0.0, 1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 1.0, 3.0, 0.0])


def test_tree_distance_hand_values():
    assert tree_distance(H, 0.5, 0.5) == 0.0
    assert tree_distance(H, 0.5, 1.5) == 1.0      # 1 + 2 - 2*min(1,2)
    assert tree_distance(H, 1.5, 3.5) == 3.0      # 2 + 3 - 2*1
    assert tree_distance(H, 3.5, 1.5) == 3.0      # symmetric
    assert tree_distance(H, 0.5, 3.5) == 2.0      # 1 + 3 - 2*1


@given(st.lists(st.floats(min_value=0.0, max_value=4.0),
                min_size=4, max_size=4))
@settings(max_examples=60, deadline=None)
def test_four_point_inequality(pts):
    s, t, u, v = pts
    d = lambda a, b: tree_distance(H, a, b)
    # in a tree metric the two largest of the three pairings coincide
    sums = sorted([d(s, t) + d(u, v), d(s, u) + d(t, v), d(s, v) + d(t, u)])
    assert sums[2] == pytest.approx(sums[1], abs=1e-9)


def test_pinched_matrix_no_pinches_is_tree_matrix():
    space = CodedSpace(H, samples=[0.5, 1.5, 3.5])
    m = pinched_matrix(space)
    expect = np.array([[0.0, 1.0, 2.0],
                       [1.0, 0.0, 3.0],
                       [2.0, 3.0, 0.0]])
    assert m == pytest.approx(expect)


def test_pinch_glue_examples():
    # gluing the two deep points at eps = 0 identifies them
    space = CodedSpace(H, pinches=((1.5, 3.5),), eps=0.0,
                       samples=[1.5, 3.5])
    m = pinched_matrix(space)
    assert m[0, 1] == 0.0
    # eps = 0.3 caps the shortcut at 0.3
    space = CodedSpace(H, pinches=((1.5, 3.5),), eps=0.3,
                       samples=[1.5, 3.5])
    assert pinched_matrix(space)[0, 1] == pytest.approx(0.3)
    # a shortcut longer than the tree path changes nothing
    space = CodedSpace(H, pinches=((1.5, 3.5),), eps=10.0,
                       samples=[1.5, 3.5])
    assert pinched_matrix(space)[0, 1] == pytest.approx(3.0)


def test_pinched_matrix_properties():
    rng = np.random.default_rng(7)
    samples = rng.uniform(0.0, 4.0, size=8)
    space = CodedSpace(H, pinches=((0.5, 2.5), (1.2, 3.8)), eps=0.4,
                       samples=samples)
    m = pinched_matrix(space)
    tre = np.array([[tree_distance(H, a, b) for b in samples]
                    for a in samples])
    assert np.all(m <= tre + 1e-12)              # shortcuts only shrink
    assert m == pytest.approx(m.T)
    assert np.all(np.diag(m) == 0.0)
    # triangle inequality over all sample triples
    for i in range(8):
        for j in range(8):
            for k in range(8):
                assert m[i, j] <= m[i, k] + m[k, j] + 1e-12


def test_pinch_endpoints_within_eps():
    space = CodedSpace(H, pinches=((0.5, 2.5),), eps=0.4,
                       samples=[0.5, 2.5])
    m = pinched_matrix(space)
    assert m[0, 1] <= 0.4 + 1e-12


def test_coded_space_validation():
    with pytest.raises(ValueError, match="eps"):
        CodedSpace(H, eps=-1.0)
    with pytest.raises(ValueError, match="domain"):
        CodedSpace(H, pinches=((0.5, 9.0),))
    with pytest.raises(ValueError, match="domain"):
        CodedSpace(H, pinches=((2.0, 1.0),))


def test_ghp_bound_examples():
    z = StepFunction([0.0, 4.0], [0.0, 0.0])
    # identical spaces with no pinches at delta = 0: the bound vanishes
    assert ghp_upper_bound(H, H, (), (), 0.0, 0.0, 0.0) == 0.0
    # one pinch pair, eps = 1, identical codings, delta = 0: 3*p*eps = 3
    assert ghp_upper_bound(H, H, ((1.0, 2.0),), ((1.0, 2.0),),
                           1.0, 1.0, 0.0) == pytest.approx(3.0)
    # sup distance 0.1, no pinches: 6*(0+1)*0.1 = 0.6
    h2 = StepFunction(H.times, H.values + 0.1)
    assert ghp_upper_bound(H, h2, (), (), 0.0, 0.0, 0.0) == pytest.approx(0.6)
    # domain length mismatch enters additively
    assert ghp_upper_bound(H, z, (), (), 0.0, 0.0, 0.0) >= 0.0


def test_ghp_bound_dominates_length_gap_and_grows_with_eps():
    short = StepFunction([0.0, 2.0], [1.0, 0.0])
    val = ghp_upper_bound(H, short, (), (), 0.0, 0.0, 0.0)
    assert val >= abs(4.0 - 2.0)
    lo = ghp_upper_bound(H, H, ((1.0, 2.0),), ((1.0, 2.0),), 0.1, 0.1, 0.0)
    hi = ghp_upper_bound(H, H, ((1.0, 2.0),), ((1.0, 2.0),), 0.5, 0.2, 0.0)
    assert hi > lo


def test_ghp_bound_rejects_mismatched_pinches():
    with pytest.raises(ValueError, match="pinch counts"):
        ghp_upper_bound(H, H, ((1.0, 2.0),), (), 0.0, 0.0, 0.0)
    with pytest.raises(ValueError, match="more than delta"):
        ghp_upper_bound(H, H, ((1.0, 2.0),), ((1.0, 3.0),), 0.0, 0.0, 0.1)


def test_write_matrix_csv(tmp_path):
    space = CodedSpace(H, samples=[0.5, 1.5])
    m = pinched_matrix(space)
    out = tmp_path / "matrix.csv"
    write_matrix_csv(space, m, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "t,0.5,1.5"
    assert lines[1] == "0.5,0.0,1.0"
