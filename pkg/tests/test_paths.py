import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wmgraph import CadlagStepPath, StepFunction, height_of_path, modulus_of_continuity
from wmgraph.paths import uniform_distance


def test_cadlag_values():
    y = CadlagStepPath([0.2, 0.4], [1.0, 0.5], 2.0)
    assert y.value(0.1) == pytest.approx(-0.1)
    assert y.value(0.2) == pytest.approx(0.8)
    assert y.value_left(0.2) == pytest.approx(-0.2)
    assert y.value(0.5) == pytest.approx(1.0)
    assert y.running_inf(0.3) == pytest.approx(-0.2)
    assert y.running_inf(5.0) == pytest.approx(1.5 - 5.0)
    assert y.min_on(0.25, 0.45) == pytest.approx(0.6)  # left limit at 0.4


def test_cadlag_validation():
    with pytest.raises(ValueError):
        CadlagStepPath([0.2, 0.2], [1.0, 1.0], 1.0)
    with pytest.raises(ValueError):
        CadlagStepPath([0.2], [-1.0], 1.0)


def test_step_function_basics():
    h = StepFunction([0.0, 1.0, 2.0], [0.0, 2.0, 1.0])
    assert h(0.5) == 0.0
    assert h(1.0) == 2.0
    assert h(10.0) == 1.0
    assert h(-1.0) == 0.0
    assert h.min_on(0.5, 1.5) == 0.0
    assert h.max_on(0.5, 2.5) == 2.0
    r = h.restricted(0.5, 2.0)
    assert r.times[0] == 0.5 and r(0.7) == 0.0 and r(1.5) == 2.0


def test_uniform_distance():
    f = StepFunction([0.0, 1.0], [0.0, 3.0])
    g = StepFunction([0.0, 1.5], [0.5, 2.0])
    assert uniform_distance(f, g) == pytest.approx(2.5)
    assert uniform_distance(f, f) == 0.0


def test_modulus_of_continuity_exact():
    h = StepFunction([0.0, 1.0, 2.0, 3.0], [0.0, 1.0, 3.0, 2.0])
    assert modulus_of_continuity(h, 0.0) == 0.0
    assert modulus_of_continuity(h, 0.5) == 2.0   # the 1 -> 3 jump
    assert modulus_of_continuity(h, 1.5) == 3.0   # window spans 0 and 3
    assert modulus_of_continuity(h, 10.0) == 3.0


@given(st.lists(st.integers(min_value=-5, max_value=5), min_size=1,
                max_size=12),
       st.floats(min_value=0.0, max_value=4.0))
@settings(max_examples=80, deadline=None)
def test_modulus_matches_brute_force(vals, delta):
    times = np.arange(len(vals), dtype=float)
    h = StepFunction(times, np.asarray(vals, dtype=float))
    # exact oracle: values v_i (on [t_i, t_{i+1})) and v_j (j > i) fit in a
    # closed window of width delta iff s can sit in segment i with t_j - s
    # <= delta, i.e. t_j - t_{i+1} < delta, or s = t_i with t_j - t_i <= delta
    best = 0.0
    n = len(vals)
    for i in range(n):
        for j in range(i + 1, n):
            if (times[j] - times[i + 1] < delta if i + 1 < n else False) \
                    or times[j] - times[i] <= delta:
                best = max(best, abs(float(vals[j] - vals[i])))
    assert modulus_of_continuity(h, delta) == pytest.approx(best)


def test_height_of_path_hand_example():
    # two nested arrivals: heights 0,1,2,1,0 at 0,0.2,0.4,0.9,1.7
    y = CadlagStepPath([0.2, 0.4], [1.0, 0.5], 2.0)
    h = height_of_path(y)
    assert h.times == pytest.approx([0.0, 0.2, 0.4, 0.9, 1.7], abs=1e-12)
    assert h.values.tolist() == [0.0, 1.0, 2.0, 1.0, 0.0]


def _brute_height(y: CadlagStepPath, t: float) -> int:
    # count jump times s <= t whose pre-jump level is strictly below the
    # infimum of the path over (s, t]
    count = 0
    for s, x in zip(y.times, y.sizes):
        if s > t:
            break
        pre = y.value_left(s)
        if y.min_on(s, t) > pre:
            count += 1
    return count


@given(st.lists(st.tuples(st.floats(min_value=0.05, max_value=5.0),
                          st.floats(min_value=0.1, max_value=2.0)),
                min_size=1, max_size=10))
@settings(max_examples=60, deadline=None)
def test_height_matches_direct_count(jumps):
    times = np.unique(np.round([t for t, _ in jumps], 3))
    if times.size == 0:
        return
    sizes = np.asarray([x for _, x in jumps])[:times.size]
    y = CadlagStepPath(times, sizes, float(times[-1]) + 1.0)
    h = height_of_path(y)
    for t in np.linspace(0.0, times[-1] + 0.5, 23):
        # at an exact breakpoint the oracle's strict comparison is subject
        # to one-ulp summation differences; test away from jump instants
        if np.min(np.abs(h.times - t)) < 1e-9:
            continue
        assert h(t) == _brute_height(y, float(t))
