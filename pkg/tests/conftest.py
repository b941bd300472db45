import numpy as np
import pytest

from cgilc import Signal, StateSpace, generate_system, lift


def simulate_response(ss: StateSpace, u_channels: np.ndarray) -> np.ndarray:
    """Independent oracle: run the state recursion sample by sample.

    ``u_channels`` has shape (n_i, N); returns outputs with shape (n_o, N).
    Kept free of any lifted-matrix code so it can catch lifting bugs.
    """
    n_i, N = u_channels.shape
    x = np.zeros(ss.n_x)
    y = np.zeros((ss.n_o, N))
    for k in range(N):
        u_k = u_channels[:, k]
        y[:, k] = ss.C @ x + ss.D @ u_k
        x = ss.A @ x + ss.B @ u_k
    return y


def random_signal(rng, space, N, channels):
    return Signal(rng.standard_normal(N * channels), space, N, channels)


def rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
    return np.linalg.norm(a - b) / scale


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def small_system(seed=0, n_x=4, n_i=2, n_o=2, N=8, feedthrough_gain=0.0):
    ss = generate_system(n_x, n_i, n_o, seed, feedthrough_gain=feedthrough_gain)
    return ss, lift(ss, N)
