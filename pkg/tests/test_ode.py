import math

import numpy as np
import pytest

from srcurrent.errors import NonFiniteState, StepSizeUnderflow
from srcurrent.ode import StepStats, dopri5_steps


def last(gen):
    for item in gen:
        pass
    return item


def test_harmonic_oscillator():
    f = lambda t, y: np.array([y[1], -y[0]])
    t, y, fy = last(dopri5_steps(f, 0.0, [1.0, 0.0], 20.0, rtol=1e-10, atol=1e-13))
    assert t == 20.0
    assert np.allclose(y, [math.cos(20), -math.sin(20)], atol=1e-8)
    assert np.allclose(fy, f(t, y))


@pytest.mark.parametrize("rtol", [1e-6, 1e-9, 1e-12])
def test_error_tracks_tolerance(rtol):
    t, y, _ = last(dopri5_steps(lambda t, y: -y, 0.0, [1.0], 5.0, rtol=rtol, atol=0.0))
    assert abs(y[0] - math.exp(-5)) < 50 * rtol * math.exp(-5)


def test_stops_are_hit_exactly():
    stops = [0.1, 1 / 3, 2.0]
    times = [t for t, _, _ in dopri5_steps(lambda t, y: np.cos(t) * y, 0.0, [1.0], 3.0,
                                           stops=stops)]
    assert set(stops) <= set(times) and times[-1] == 3.0
    assert np.all(np.diff(times) > 0)


def test_statistics():
    st = StepStats()
    last(dopri5_steps(lambda t, y: -y, 0.0, [1.0], 1.0, stats=st))
    assert st.n_accepted > 0 and st.n_rhs >= 6 * st.n_accepted
    assert 0 < st.h_min <= st.h_max


def test_blow_up_detected():
    # y' = y^2 from y = 1 reaches infinity at t = 1
    with pytest.raises((StepSizeUnderflow, NonFiniteState)):
        last(dopri5_steps(lambda t, y: y ** 2, 0.0, [1.0], 2.0))


def test_nonfinite_start():
    with pytest.raises(NonFiniteState):
        last(dopri5_steps(lambda t, y: np.full_like(y, np.nan), 0.0, [1.0], 1.0))
