import numpy as np
import pytest

from darbouxlab.errors import StepFailure
from darbouxlab.ode import integrate


def test_linear_complex_system_matches_exponential():
    from scipy.linalg import expm

    m = np.array([[0.3j, 1.0], [-1.0, -0.2 + 0.5j]])
    y0 = np.array([1.0, 1j])
    times = np.linspace(0, 3, 7)
    sol = integrate(lambda t, y: m @ y, y0, times, rtol=1e-11, atol=1e-13)
    for t, y in zip(times, sol.y):
        assert np.allclose(y, expm(t * m) @ y0, atol=1e-9)


def test_output_times_are_hit_exactly_and_backward_works():
    times = np.array([0.0, -0.5, -1.25])
    sol = integrate(lambda t, y: -y, np.array(1.0), times, rtol=1e-12, atol=1e-14)
    assert np.array_equal(sol.t, times)
    assert np.allclose(sol.y, np.exp(-times), rtol=1e-10)


def test_fifth_order_convergence():
    # fixed steps through max_step with tolerances too loose to reject
    errs = []
    for h in (0.2, 0.1):
        sol = integrate(lambda t, y: np.cos(t) * y, np.array(1.0), [0, 2], rtol=1, atol=1, max_step=h, first_step=h)
        errs.append(abs(sol.y[-1] - np.exp(np.sin(2.0))))
    assert 20 < errs[0] / errs[1] < 60


def test_post_step_hook_projects():
    sol = integrate(lambda t, y: 1j * y, np.array([1.0, 0.0]), [0, 5],
                    post_step=lambda t, y: y / np.linalg.norm(y), max_step=0.1)
    assert abs(np.linalg.norm(sol.y[-1]) - 1) < 1e-14


def test_check_can_abort():
    def check(t, y):
        if t > 0.5:
            raise RuntimeError("stop")

    with pytest.raises(RuntimeError):
        integrate(lambda t, y: y, np.array(1.0), [0, 1], check=check, max_step=0.1)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blow_up_raises_step_failure():
    with pytest.raises(StepFailure):
        integrate(lambda t, y: y * y, np.array(1.0), [0, 2])


def test_single_time_returns_initial_state():
    sol = integrate(lambda t, y: y, np.ones((2, 2)), [0.0])
    assert sol.y.shape == (1, 2, 2) and sol.n_rhs == 0
