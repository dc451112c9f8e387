"""The 21-pendulum benchmark scenario: one leader, twenty followers.

Identical pendulums coupled through spring-damper pairs whose attachment
height a(t) along the pendulum is uncertain, 0 < a(t) <= l.  With states
x_i = (angle, angular velocity) the coupling acts through
phi(t, y) = (a(t)^2 / l^2) [k1 k2] y, a norm-bounded operator with
C = [k1 k2].

Topology: the coupling graph is the 21-cycle 0-1-...-20-0 (so d marks
followers 1 and 20); the control graph is the follower path 1-2-...-20
with the leader observed by followers 1, 7, 12 and 18.
"""

from __future__ import annotations

import numpy as np

from .graph import Topology
from .model import NormBounded, SystemModel

__all__ = [
    "PENDULUM_PARAMS",
    "pendulum_model",
    "pendulum_topology",
    "spring_schedule",
    "pendulum_norm_bounded",
    "default_initial_states",
]

PENDULUM_PARAMS = {
    "m": 1.0,  # kg
    "l": 1.0,  # m
    "g": 9.8,  # m/s^2
    "k1": 0.5,  # N/m
    "k2": 0.5,  # N/(m/s)
}

N_FOLLOWERS = 20
PINNED = (1, 7, 12, 18)
LEADER_COUPLED = (1, 20)


def pendulum_model() -> SystemModel:
    m, l, g = PENDULUM_PARAMS["m"], PENDULUM_PARAMS["l"], PENDULUM_PARAMS["g"]
    k1, k2 = PENDULUM_PARAMS["k1"], PENDULUM_PARAMS["k2"]
    A = np.array([[0.0, 1.0], [-g / l, 0.0]])
    B1 = np.array([[0.0], [-1.0 / (m * l**2)]])
    B2 = np.array([[0.0], [1.0 / m]])
    C = np.array([[k1, k2]])
    Q = np.array([[1.0, 0.0], [0.0, 0.1]])
    R = np.array([[0.01]])
    return SystemModel.create(A, B1, B2, C, Q, R)


def pendulum_topology() -> Topology:
    N = N_FOLLOWERS
    control_edges = [(i, i + 1) for i in range(1, N)]
    phys_edges = [(i, i + 1) for i in range(1, N)]
    g = [1 if i in PINNED else 0 for i in range(1, N + 1)]
    d = [1 if i in LEADER_COUPLED else 0 for i in range(1, N + 1)]
    return Topology.create(N, control_edges, phys_edges, g, d)


def spring_schedule(t: float) -> float:
    """Uncertain spring-damper position a(t) = 0.5 + 0.4 sin t."""
    return 0.5 + 0.4 * np.sin(t)


def pendulum_norm_bounded(constant_a: float | None = None) -> NormBounded:
    """The realized coupling as a norm-bounded operator, delta(t) = a(t)^2/l^2.

    With constant_a = l the schedule saturates the bound (delta = 1).
    """
    l = PENDULUM_PARAMS["l"]
    C = np.array([[PENDULUM_PARAMS["k1"], PENDULUM_PARAMS["k2"]]])
    if constant_a is None:
        delta = lambda t: np.array([[spring_schedule(t) ** 2 / l**2]])
    else:
        dv = float(constant_a) ** 2 / l**2
        delta = lambda t: np.array([[dv]])
    return NormBounded(delta=delta, C=C)


def default_initial_states(seed: int = 20130521) -> np.ndarray:
    """Leader at (0.3, 0); follower angles seeded uniform in [-0.5, 0.5] rad.

    Returns the (N+1) x 2 stacked initial state, leader first.
    """
    rng = np.random.default_rng(seed)
    x0 = np.zeros((N_FOLLOWERS + 1, 2))
    x0[0] = (0.3, 0.0)
    x0[1:, 0] = rng.uniform(-0.5, 0.5, size=N_FOLLOWERS)
    return x0
