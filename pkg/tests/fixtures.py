"""Shared synthetic systems for learner tests."""
import numpy as np

from vipursuit.rl import CostParams, Learner, LearnerConfig, run_learner_step

# e0 integrates the control; e1, e2 are one- and two-step delayed copies
SHIFT_A = np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
SHIFT_B = np.array([1.0, 0.0, 0.0])
SHIFT_Q = np.eye(3)
SHIFT_R = 1.0

SCALAR_A = np.eye(1)
SCALAR_B = np.ones(1)
SCALAR_Q = np.eye(1)
SCALAR_R = 1.0


def train_online(A, B, Q, R, steps, alpha_c, alpha_a, seed=0, noise=1.0, Delta=1e-8):
    """Online learning on randomly excited transitions until the learner freezes."""
    n = A.shape[0]
    cfg = LearnerConfig(alpha_a=alpha_a, alpha_c=alpha_c, Delta=Delta, L=20, N_t=10**9)
    lr = Learner.create(cfg, CostParams(Q, R), seed=seed)
    rng = np.random.default_rng(seed + 1)
    for _ in range(steps):
        E = rng.normal(size=n)
        u = lr.control(E) + noise * rng.normal()
        run_learner_step(lr, (E, u, A @ E + B * u))
        if lr.stop:
            break
    return lr


def excitation_samples(A, B, count, seed=0):
    rng = np.random.default_rng(seed)
    n = A.shape[0]
    out = []
    for _ in range(count):
        E = rng.normal(size=n)
        u = rng.normal()
        out.append((E, u, A @ E + B * u))
    return out


def gain_matches(learned, oracle, rel=0.02):
    """Elementwise 2% agreement; entries that are zero use 2% of the largest gain."""
    learned = np.asarray(learned)
    oracle = np.asarray(oracle)
    tol = rel * np.maximum(np.abs(oracle), np.max(np.abs(oracle)) * (np.abs(oracle) == 0))
    return bool(np.all(np.abs(learned - oracle) <= tol)), tol
