"""The two dynamic event-triggering mechanisms.

For every agent i the mechanism watches its measurement error
``e_i = xhat_i - x_i`` (last broadcast minus true state).  An event fires the
first time the error term outgrows a threshold that combines a decaying
per-agent auxiliary variable ``chi_i`` with the locally measurable
disagreement, at which point the agent rebroadcasts and the error resets.

Leaderless form, per agent i with neighbor count N_i:

    fire  iff  theta_i * (mu_bar_i * N_i * ||e_i||^2
                          - sum_j (sigma_i/4) * ||sqrt(|A_ij|) p_ij||^2) > chi_i
    chi_i' = -beta_i chi_i + delta_i * ((sigma_i/4) * sum_j ||sqrt(|A_ij|) p_ij||^2
                                        - mu_bar_i * N_i * ||e_i||^2)

with ``p_ij = xhat_i - sgn(A_ij) xhat_j`` and ``mu_bar_i`` the largest
eigenvalue among the incident absolute weights.  The leader-follower form
replaces the neighborhood terms by ``gamma_i ||e_i||^2 - sigma_i ||qhat_i||^2``
with the spectral constant ``gamma_i`` computed from the incident weights.

Equality never fires: the threshold inequality uses "<=" for staying silent,
so the fire condition is strict.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import NoNeighbors, NotNeighbors
from .linalg import sym_eigen
from .mwgraph import InputCoupling, MatrixWeightedGraph


class AgentParams(NamedTuple):
    """Trigger parameters of a single agent."""

    sigma: float
    theta: float
    beta: float
    delta: float
    chi0: float

    @property
    def chi_decay_rate(self) -> float:
        """Exponent of the guaranteed lower envelope chi0 * exp(-rate * t)."""
        return self.beta + self.delta / self.theta


@dataclass(frozen=True, eq=False)
class TriggerParams:
    """Per-agent trigger parameters, stored as aligned arrays of length n."""

    sigma: np.ndarray
    theta: np.ndarray
    beta: np.ndarray
    delta: np.ndarray
    chi0: np.ndarray

    def __post_init__(self):
        fields = {}
        length = None
        for name in ("sigma", "theta", "beta", "delta", "chi0"):
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=float)).copy()
            if length is None:
                length = arr.shape[0]
            if arr.shape != (length,):
                raise ValueError("trigger parameter arrays must share one length")
            arr.setflags(write=False)
            fields[name] = arr
        for name, arr in fields.items():
            object.__setattr__(self, name, arr)

    @classmethod
    def uniform(cls, n: int, sigma: float, theta: float, beta: float,
                delta: float, chi0: float) -> "TriggerParams":
        full = lambda v: np.full(n, float(v))
        return cls(full(sigma), full(theta), full(beta), full(delta), full(chi0))

    @property
    def n(self) -> int:
        return self.sigma.shape[0]

    def agent(self, i: int) -> AgentParams:
        return AgentParams(float(self.sigma[i]), float(self.theta[i]),
                           float(self.beta[i]), float(self.delta[i]),
                           float(self.chi0[i]))

    def replace(self, i: int, **values) -> "TriggerParams":
        arrays = {name: np.array(getattr(self, name)) for name in
                  ("sigma", "theta", "beta", "delta", "chi0")}
        for key, val in values.items():
            if key not in arrays:
                raise KeyError(key)
            arrays[key][i] = float(val)
        return TriggerParams(**arrays)


@dataclass(frozen=True)
class Leaderless:
    """Mode marker: pure neighbor coupling, no external input."""


@dataclass(frozen=True, eq=False)
class LeaderFollower:
    """Mode carrying the homogeneous input value and its attachment map."""

    u0: np.ndarray
    coupling: InputCoupling

    def __post_init__(self):
        arr = np.asarray(self.u0, dtype=float).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "u0", arr)


Mode = Union[Leaderless, LeaderFollower]


@dataclass(frozen=True)
class Violation:
    agent: int
    field: str
    message: str

    def __str__(self):
        return f"agent {self.agent}: {self.field}: {self.message}"


def relative_broadcast(i: int, j: int, xhat: np.ndarray,
                       g: MatrixWeightedGraph) -> np.ndarray:
    """p_ij = xhat_i - sgn(A_ij) * xhat_j, from the stacked broadcast vector."""
    e = g.edge(i, j)
    if e is None:
        raise NotNeighbors(f"agents {i} and {j} share no edge")
    d = g.d
    xi = xhat[i * d:(i + 1) * d]
    xj = xhat[j * d:(j + 1) * d]
    return xi - e.sign * xj


def control_leaderless(i: int, xhat: np.ndarray,
                       g: MatrixWeightedGraph) -> np.ndarray:
    """qhat_i = -sum_j |A_ij| p_ij.  Stacking over all agents equals -L @ xhat."""
    out = np.zeros(g.d)
    for j in g.neighbors(i):
        p = relative_broadcast(i, j, xhat, g)
        out -= g.abs_weight(i, j).entries @ p
    return out


def control_leader_follower(i: int, xhat: np.ndarray, g: MatrixWeightedGraph,
                            coupling: InputCoupling,
                            u0: np.ndarray) -> np.ndarray:
    """Leaderless control plus input tracking terms
    ``-sum_l |B_il| (xhat_i - sgn(B_il) u0)``."""
    out = control_leaderless(i, xhat, g)
    d = g.d
    xi = xhat[i * d:(i + 1) * d]
    for c in coupling.entries_for_agent(i):
        out -= c.abs_weight().entries @ (xi - c.sign * np.asarray(u0, dtype=float))
    return out


def mu_bar(i: int, g: MatrixWeightedGraph) -> float:
    """Largest eigenvalue among the absolute weights incident to agent i."""
    neigh = g.neighbors(i)
    if not neigh:
        raise NoNeighbors(f"agent {i} has no neighbors")
    return max(float(sym_eigen(g.abs_weight(i, j)).lambda_max) for j in neigh)


def gamma(i: int, g: MatrixWeightedGraph, coupling: InputCoupling) -> float:
    """Error-amplification constant of the leader-follower trigger:

        n * (sum_j mu(|A_ij|) + sum_l mu(|B_il|))^2 + n * sum_j mu(|A_ij|)^2

    Empty neighbor and input sets give 0.
    """
    n = g.n
    mus = [float(sym_eigen(g.abs_weight(i, j)).lambda_max) for j in g.neighbors(i)]
    mus_b = [float(sym_eigen(c.abs_weight()).lambda_max)
             for c in coupling.entries_for_agent(i)]
    return n * (sum(mus) + sum(mus_b)) ** 2 + n * sum(m * m for m in mus)


PList = Sequence[tuple[np.ndarray, np.ndarray]]


def weighted_disagreement(p_list: PList) -> float:
    """sum_j ||sqrt(|A_ij|) p_ij||^2 over (sqrt-weight, p) pairs."""
    total = 0.0
    for sqrt_w, p in p_list:
        v = np.asarray(sqrt_w) @ np.asarray(p)
        total += float(v @ v)
    return total


def leaderless_threshold_lhs(e_i: np.ndarray, p_list: PList,
                             params: AgentParams, mu_bar_i: float,
                             deg: int) -> float:
    e_i = np.asarray(e_i, dtype=float)
    quad = mu_bar_i * deg * float(e_i @ e_i)
    return params.theta * (quad - (params.sigma / 4.0) * weighted_disagreement(p_list))


def leaderless_fires(e_i: np.ndarray, p_list: PList, chi: float,
                     params: AgentParams, mu_bar_i: float, deg: int) -> bool:
    """Strict threshold violation; equality stays silent."""
    return leaderless_threshold_lhs(e_i, p_list, params, mu_bar_i, deg) > chi


def chi_rate_leaderless(e_i: np.ndarray, p_list: PList, chi: float,
                        params: AgentParams, mu_bar_i: float,
                        deg: int) -> float:
    e_i = np.asarray(e_i, dtype=float)
    drive = (params.sigma / 4.0) * weighted_disagreement(p_list) \
        - mu_bar_i * deg * float(e_i @ e_i)
    return -params.beta * chi + params.delta * drive


def lf_threshold_lhs(e_i: np.ndarray, qhat_i: np.ndarray,
                     params: AgentParams, gamma_i: float) -> float:
    e_i = np.asarray(e_i, dtype=float)
    q = np.asarray(qhat_i, dtype=float)
    return params.theta * (gamma_i * float(e_i @ e_i) - params.sigma * float(q @ q))


def lf_fires(e_i: np.ndarray, qhat_i: np.ndarray, chi: float,
             params: AgentParams, gamma_i: float) -> bool:
    return lf_threshold_lhs(e_i, qhat_i, params, gamma_i) > chi


def chi_rate_lf(e_i: np.ndarray, qhat_i: np.ndarray, chi: float,
                params: AgentParams, gamma_i: float) -> float:
    e_i = np.asarray(e_i, dtype=float)
    q = np.asarray(qhat_i, dtype=float)
    drive = params.sigma * float(q @ q) - gamma_i * float(e_i @ e_i)
    return -params.beta * chi + params.delta * drive


def validate_params(params: TriggerParams,
                    mode: Optional[Mode] = None) -> list[Violation]:
    """Range checks plus the stability bound theta > (1 - delta) / beta.

    Returns every violation found (empty list means valid); never raises.
    The bound is identical in both modes; ``mode`` is accepted for symmetry
    with the scenario-level validation that dispatches on it.
    """
    del mode
    out = []
    for i in range(params.n):
        a = params.agent(i)
        if not (0.0 <= a.sigma < 1.0):
            out.append(Violation(i, "sigma", f"{a.sigma} outside [0, 1)"))
        if not a.theta > 0.0:
            out.append(Violation(i, "theta", f"{a.theta} must be positive"))
        if not a.beta > 0.0:
            out.append(Violation(i, "beta", f"{a.beta} must be positive"))
        if not (0.0 <= a.delta <= 1.0):
            out.append(Violation(i, "delta", f"{a.delta} outside [0, 1]"))
        if not a.chi0 > 0.0:
            out.append(Violation(i, "chi0", f"{a.chi0} must be positive"))
        if a.theta > 0.0 and a.beta > 0.0:
            bound = (1.0 - a.delta) / a.beta
            if not a.theta > bound:
                out.append(Violation(
                    i, "theta",
                    f"{a.theta} does not exceed (1 - delta) / beta = {bound}"))
    return out
