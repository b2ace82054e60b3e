"""Model-free actor-critic value iteration for one scalar control axis.

The critic is a quadratic form ``V(E, u) = 0.5 * z^T W z`` over the stacked
vector ``z = (E, u)``; the actor is a linear gain row ``u = K . E``. Both are
trained online from observed transitions ``(E, u, E_next)``.

Windows are usually three errors long, but nothing here assumes that: the
dimension is taken from ``len(E)``, so a scalar system uses 2x2 critics.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ._jit import njit, select

WUU_FLOOR = 1e-9


class LearnerError(ValueError):
    pass


class NonInvertibleCritic(LearnerError):
    """The control block of the critic is too small to invert."""


@dataclass(frozen=True)
class CostParams:
    Q: np.ndarray
    R: float

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise LearnerError("Q must be a square matrix")
        if not np.allclose(Q, Q.T, atol=1e-12):
            raise LearnerError("Q must be symmetric")
        if np.linalg.eigvalsh(Q).min() <= 0:
            raise LearnerError("Q must be positive definite")
        if not self.R > 0:
            raise LearnerError("R must be positive")
        Q.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", float(self.R))

    @classmethod
    def scaled(cls, q_scale: float, r: float, n: int = 3) -> "CostParams":
        return cls(q_scale * np.eye(n), r)

    def __eq__(self, other):
        if not isinstance(other, CostParams):
            return NotImplemented
        return self.R == other.R and np.array_equal(self.Q, other.Q)

    __hash__ = None


@dataclass(frozen=True)
class LearnerConfig:
    """Learning rates, convergence window and initialization.

    ``normalize`` divides each gradient step by one plus a power of the norm of its
    regressor (a normalized LMS step), which keeps the updates bounded when
    errors are measured in hundreds of kilometres. ``literal`` replaces the
    signed error by half its square. It is only there for comparison.
    """

    alpha_a: float = 0.01
    alpha_c: float = 1e-6
    Delta: float = 1e-8
    L: int = 20
    N_t: int = 6000
    init_scale: float = 0.1
    rng_seed: int = 0
    normalize: bool = False
    literal: bool = False

    def __post_init__(self):
        for name in ("alpha_a", "alpha_c"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise LearnerError(f"{name} must lie in (0, 1), got {v!r}")
        if not self.Delta > 0:
            raise LearnerError("Delta must be positive")
        if self.L < 1:
            raise LearnerError("L must be at least 1")
        if self.N_t < 1:
            raise LearnerError("N_t must be at least 1")
        if not self.init_scale > 0:
            raise LearnerError("init_scale must be positive")


# ---------------------------------------------------------------------------
# Primitives


def _z(E, u) -> np.ndarray:
    return np.append(np.asarray(E, dtype=float), float(u))


def stage_cost(E, u: float, cp: CostParams) -> float:
    E = np.asarray(E, dtype=float)
    return 0.5 * (float(E @ cp.Q @ E) + cp.R * float(u) ** 2)


def value(E, u: float, W: np.ndarray) -> float:
    z = _z(E, u)
    return 0.5 * float(z @ W @ z)


def actor_target(E, W: np.ndarray) -> float:
    wuu = W[-1, -1]
    if not wuu > WUU_FLOOR:
        raise NonInvertibleCritic(f"W_uu = {wuu!r} is not invertible")
    return -float(W[-1, :-1] @ np.asarray(E, dtype=float)) / wuu


def critic_target(E_next, u_next: float, E, u: float, W: np.ndarray, cp: CostParams) -> float:
    return stage_cost(E, u, cp) + value(E_next, u_next, W)


def critic_update(W: np.ndarray, E, u: float, target: float, alpha_c: float, literal: bool = False) -> np.ndarray:
    """One descent step on 0.5 * (V(E, u) - target)^2."""
    z = _z(E, u)
    e = 0.5 * float(z @ W @ z) - target
    if literal:
        e = 0.5 * e * e
    Wn = W - alpha_c * e * 0.5 * np.outer(z, z)
    return 0.5 * (Wn + Wn.T)


def actor_update(K: np.ndarray, E, u_hat: float, u_tilde: float, alpha_a: float, literal: bool = False) -> np.ndarray:
    """One descent step on 0.5 * (u_hat - u_tilde)^2 with ``u_hat = K . E``."""
    e = float(u_hat) - float(u_tilde)
    if literal:
        e = 0.5 * e * e
    return np.asarray(K, dtype=float) - alpha_a * e * np.asarray(E, dtype=float)


def max_abs_diff(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def converged(history, Delta: float, L: int) -> bool:
    """True when the last ``L + 1`` successive differences are all within ``Delta``."""
    h = list(history)
    if len(h) < L + 2:
        return False
    tail = h[-(L + 2):]
    return all(max_abs_diff(tail[j + 1], tail[j]) <= Delta for j in range(L + 1))


# ---------------------------------------------------------------------------
# Fused kernel used by the online learner


@njit
def _learn_kernel(W, K, E, u, E_next, Q, R, alpha_c, alpha_a, normalize, literal, floor):
    n = E.shape[0]
    m = n + 1
    z = np.empty(m)
    zn = np.empty(m)
    for i in range(n):
        z[i] = E[i]
        zn[i] = E_next[i]
    z[n] = u
    u_next = 0.0
    for i in range(n):
        u_next += K[i] * E_next[i]
    zn[n] = u_next

    cost = R * u * u
    v_now = 0.0
    v_next = 0.0
    for i in range(n):
        for j in range(n):
            cost += E[i] * Q[i, j] * E[j]
    for i in range(m):
        for j in range(m):
            v_now += z[i] * W[i, j] * z[j]
            v_next += zn[i] * W[i, j] * zn[j]
    cost *= 0.5
    v_now *= 0.5
    v_next *= 0.5

    e_c = v_now - (cost + v_next)
    if literal:
        e_c = 0.5 * e_c * e_c
    step_c = alpha_c
    if normalize:
        zz = 0.0
        for i in range(m):
            zz += z[i] * z[i]
        step_c = alpha_c / (1.0 + 0.25 * zz * zz)
    Wn = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            Wn[i, j] = W[i, j] - step_c * e_c * 0.5 * z[i] * z[j]
    for i in range(m):
        for j in range(i + 1, m):
            s = 0.5 * (Wn[i, j] + Wn[j, i])
            Wn[i, j] = s
            Wn[j, i] = s

    wuu = Wn[n, n]
    if not wuu > floor:
        return Wn, K.copy(), False

    u_hat = 0.0
    u_tilde = 0.0
    ee = 0.0
    for i in range(n):
        u_hat += K[i] * E[i]
        u_tilde -= Wn[n, i] * E[i]
        ee += E[i] * E[i]
    u_tilde /= wuu
    e_a = u_hat - u_tilde
    if literal:
        e_a = 0.5 * e_a * e_a
    step_a = alpha_a
    if normalize:
        step_a = alpha_a / (1.0 + ee)
    Kn = np.empty(n)
    for i in range(n):
        Kn[i] = K[i] - step_a * e_a * E[i]
    return Wn, Kn, True


def _learn_numpy(W, K, E, u, E_next, Q, R, alpha_c, alpha_a, normalize, literal, floor):
    n = E.shape[0]
    z = np.append(E, u)
    zn = np.append(E_next, K @ E_next)
    cost = 0.5 * (E @ Q @ E + R * u * u)
    e_c = 0.5 * (z @ W @ z) - (cost + 0.5 * (zn @ W @ zn))
    if literal:
        e_c = 0.5 * e_c * e_c
    step_c = alpha_c / (1.0 + 0.25 * (z @ z) ** 2) if normalize else alpha_c
    Wn = W - step_c * e_c * 0.5 * np.outer(z, z)
    Wn = 0.5 * (Wn + Wn.T)
    wuu = Wn[n, n]
    if not wuu > floor:
        return Wn, K.copy(), False
    e_a = K @ E + (Wn[n, :n] @ E) / wuu
    if literal:
        e_a = 0.5 * e_a * e_a
    step_a = alpha_a / (1.0 + E @ E) if normalize else alpha_a
    return Wn, K - step_a * e_a * E, True


_learn = select(_learn_kernel, _learn_numpy)


# ---------------------------------------------------------------------------
# Algorithm state


def initial_weights(rng: np.random.Generator, n: int, init_scale: float):
    """Uniform draws in ``[-init_scale, init_scale]``; ``W_uu`` starts at 1."""
    A = rng.uniform(-init_scale, init_scale, size=(n + 1, n + 1))
    W = np.triu(A) + np.triu(A, 1).T
    W[n, n] = 1.0
    K = rng.uniform(-init_scale, init_scale, size=n)
    return W, K


@dataclass
class Learner:
    """Online learner for one axis; owns its weights, histories and flags."""

    cfg: LearnerConfig
    cost: CostParams
    W: np.ndarray
    K: np.ndarray
    rng: np.random.Generator = field(repr=False)
    r: int = 0
    critic_converged: bool = False
    actor_converged: bool = False
    stop: bool = False
    resets: int = 0
    W_hist: deque = field(default_factory=deque, repr=False)
    K_hist: deque = field(default_factory=deque, repr=False)

    @classmethod
    def create(cls, cfg: LearnerConfig, cost: CostParams, seed=None, W=None, K=None) -> "Learner":
        n = cost.Q.shape[0]
        rng = np.random.default_rng(cfg.rng_seed if seed is None else seed)
        W0, K0 = initial_weights(rng, n, cfg.init_scale)
        if W is not None:
            W0 = np.array(W, dtype=float)
        if K is not None:
            K0 = np.array(K, dtype=float)
        lr = cls(cfg, cost, W0, K0, rng)
        lr._reset_history()
        return lr

    def _reset_history(self):
        size = self.cfg.L + 2
        self.W_hist = deque([self.W.copy()], maxlen=size)
        self.K_hist = deque([self.K.copy()], maxlen=size)
        self.r = 0
        self.critic_converged = False
        self.actor_converged = False

    def reinitialize(self):
        self.W, self.K = initial_weights(self.rng, self.K.shape[0], self.cfg.init_scale)
        self.resets += 1
        self._reset_history()

    def freeze(self):
        self.stop = True

    def control(self, E) -> float:
        return float(self.K @ np.asarray(E, dtype=float))


def run_learner_step(state: Learner, sample, config: LearnerConfig | None = None) -> tuple[Learner, float]:
    """Consume one observed transition and return the control for ``E_next``.

    ``sample`` is ``(E, u, E_next)``: the window the last control was computed
    on, that control, and the window observed after it took effect. The state
    is updated in place and also returned.
    """
    cfg = config or state.cfg
    E, u, E_next = sample
    E = np.asarray(E, dtype=float)
    E_next = np.asarray(E_next, dtype=float)
    if state.stop:
        return state, state.control(E_next)

    W, K, ok = _learn(
        state.W, state.K, E, float(u), E_next, state.cost.Q, state.cost.R,
        cfg.alpha_c, cfg.alpha_a, cfg.normalize, cfg.literal, WUU_FLOOR,
    )
    if not ok or not (np.all(np.isfinite(W)) and np.all(np.isfinite(K))):
        state.reinitialize()
        return state, state.control(E_next)

    state.W, state.K = W, K
    state.r += 1
    state.W_hist.append(W)
    state.K_hist.append(K)
    state.critic_converged = converged(state.W_hist, cfg.Delta, cfg.L)
    state.actor_converged = converged(state.K_hist, cfg.Delta, cfg.L)
    if state.critic_converged and state.actor_converged:
        state.stop = True
    elif state.r >= cfg.N_t:
        state.reinitialize()
    return state, state.control(E_next)


# ---------------------------------------------------------------------------
# Batch value iteration over a fixed sample set


def greedy_gain(W: np.ndarray) -> np.ndarray:
    wuu = W[-1, -1]
    if not wuu > WUU_FLOOR:
        raise NonInvertibleCritic(f"W_uu = {wuu!r} is not invertible")
    return -W[-1, :-1] / wuu


def _quad_features(Z: np.ndarray) -> np.ndarray:
    m = Z.shape[1]
    iu = np.triu_indices(m)
    F = 0.5 * Z[:, iu[0]] * Z[:, iu[1]]
    F[:, iu[0] != iu[1]] *= 2.0
    return F


def _from_features(theta: np.ndarray, m: int) -> np.ndarray:
    W = np.zeros((m, m))
    W[np.triu_indices(m)] = theta
    return W + np.triu(W, 1).T


def batch_value_iteration(samples, W0: np.ndarray, cost: CostParams, iters: int):
    """Exact least-squares value iteration on a fixed transition set.

    Each sweep fits ``W`` so that ``V(E, u)`` reproduces the Bellman target
    ``U(E, u) + V_prev(E', K E')`` on every sample, then sets the actor to the
    greedy gain. Returns the list of ``(W, K)`` pairs, starting with ``W0``.
    """
    E = np.array([s[0] for s in samples], dtype=float)
    U = np.array([s[1] for s in samples], dtype=float)
    En = np.array([s[2] for s in samples], dtype=float)
    m = E.shape[1] + 1
    F = _quad_features(np.column_stack([E, U]))
    if np.linalg.matrix_rank(F) < F.shape[1]:
        raise LearnerError("sample set does not excite every quadratic feature")
    costs = 0.5 * (np.einsum("ni,ij,nj->n", E, cost.Q, E) + cost.R * U ** 2)
    W = np.array(W0, dtype=float)
    K = greedy_gain(W)
    out = [(W, K)]
    for _ in range(iters):
        zn = np.column_stack([En, En @ K])
        targets = costs + 0.5 * np.einsum("ni,ij,nj->n", zn, W, zn)
        theta, *_ = np.linalg.lstsq(F, targets, rcond=None)
        W = _from_features(theta, m)
        K = greedy_gain(W)
        out.append((W, K))
    return out


# ---------------------------------------------------------------------------
# Reference solution


def riccati_oracle(A, B, Q, R, tol: float = 1e-12, max_iter: int = 1_000_000):
    """Solve the discrete algebraic Riccati equation by fixed-point iteration.

    Returns ``(P, K)`` with the optimal feedback ``u = -K x``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    B = np.asarray(B, dtype=float).reshape(n, -1)
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    P = Q.copy()
    for _ in range(max_iter):
        G = R + B.T @ P @ B
        BPA = B.T @ P @ A
        Pn = Q + A.T @ P @ A - BPA.T @ np.linalg.solve(G, BPA)
        Pn = 0.5 * (Pn + Pn.T)
        if not np.all(np.isfinite(Pn)) or np.max(np.abs(Pn)) > 1e150:
            raise LearnerError("Riccati iteration diverged")
        if np.max(np.abs(Pn - P)) <= tol * max(1.0, np.max(np.abs(Pn))):
            P = Pn
            break
        P = Pn
    else:
        raise LearnerError("Riccati iteration did not converge")
    K = np.linalg.solve(R + B.T @ P @ B, B.T @ P @ A)
    return P, K.reshape(-1) if K.shape[0] == 1 else K


__all__ = [
    "CostParams",
    "Learner",
    "LearnerConfig",
    "LearnerError",
    "NonInvertibleCritic",
    "actor_target",
    "actor_update",
    "batch_value_iteration",
    "converged",
    "critic_target",
    "critic_update",
    "greedy_gain",
    "initial_weights",
    "riccati_oracle",
    "run_learner_step",
    "stage_cost",
    "value",
]
