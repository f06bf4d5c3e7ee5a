"""Soft actor-critic with double Q-networks and automatic temperature tuning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .buffers import BufferStateError, ReplayBuffers
from .nets import MLP, Adam

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)
_SQUASH_EPS = 1e-6


@dataclass(frozen=True)
class SacConfig:
    """Defaults tuned for the 25-step pendulum swing-up."""

    hidden: tuple = (64, 64)
    learning_rate: float = 1e-3
    batch_size: int = 128
    #: short horizon, so a short effective discount
    gamma: float = 0.95
    tau: float = 0.005
    #: None means -action_dim
    target_entropy: float | None = None
    #: α starts near 0.1
    init_log_alpha: float = -2.3
    steps_per_real_trial: int = 500
    steps_per_model_trial: int = 250


class SacAgent:
    """Gaussian policy squashed by tanh onto [low, high].

    ``observe`` maps raw states to network features; rewards are the
    negated costs stored in the buffers.
    """

    def __init__(self, obs_dim: int, action_dim: int, action_low: float, action_high: float,
                 config: SacConfig | None = None, seed=0, observe=None):
        self.config = config or SacConfig()
        cfg = self.config
        rng = np.random.default_rng(seed)
        self.obs_dim, self.action_dim = obs_dim, action_dim
        self.low, self.high = float(action_low), float(action_high)
        self.scale = 0.5 * (self.high - self.low)
        self.offset = 0.5 * (self.high + self.low)
        self.observe = observe if observe is not None else (lambda s: np.asarray(s, dtype=float))
        h = tuple(cfg.hidden)
        self.policy = MLP((obs_dim, *h, 2 * action_dim), rng)
        self.q = [MLP((obs_dim + action_dim, *h, 1), rng) for _ in range(2)]
        self.q_target = [q.copy() for q in self.q]
        self.log_alpha = float(cfg.init_log_alpha)
        self.target_entropy = -float(action_dim) if cfg.target_entropy is None else float(cfg.target_entropy)
        self.policy_opt = Adam(self.policy.params, cfg.learning_rate)
        self.q_opt = [Adam(q.params, cfg.learning_rate) for q in self.q]
        self._alpha_m = self._alpha_v = 0.0
        self._alpha_t = 0
        self.n_updates = 0

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha))

    # -- policy ------------------------------------------------------------------

    def _policy_head(self, obs):
        out, cache = self.policy.forward(obs)
        mu, raw = out[:, : self.action_dim], out[:, self.action_dim:]
        t_raw = np.tanh(raw)
        log_std = LOG_STD_MIN + 0.5 * (LOG_STD_MAX - LOG_STD_MIN) * (t_raw + 1.0)
        return mu, log_std, t_raw, cache

    def _sample(self, obs, eps):
        """Reparameterized squashed sample and everything the backward pass needs."""
        mu, log_std, t_raw, cache = self._policy_head(obs)
        std = np.exp(log_std)
        u = mu + std * eps
        t = np.tanh(u)
        a = self.offset + self.scale * t
        jac = self.scale * (1.0 - t * t) + _SQUASH_EPS
        logp = np.sum(-0.5 * eps * eps - log_std - _HALF_LOG_2PI - np.log(jac), axis=1)
        return a, logp, (mu, log_std, t_raw, std, u, t, jac, cache)

    def act(self, states, rng, deterministic: bool = False) -> np.ndarray:
        """Actions for a batch of raw states, always inside [low, high]."""
        obs = np.atleast_2d(self.observe(states))
        if deterministic:
            mu, _, _, _ = self._policy_head(obs)
            a = self.offset + self.scale * np.tanh(mu)
        else:
            eps = rng.standard_normal((obs.shape[0], self.action_dim))
            a, _, _ = self._sample(obs, eps)
        return np.clip(a, self.low, self.high)

    # -- critics ------------------------------------------------------------------

    def _q_input(self, obs, a):
        return np.hstack([obs, (a - self.offset) / self.scale])

    def critic_loss(self, batch) -> float:
        """Mean over both critics of ½(Q - y)² on a fixed batch (targets recomputed)."""
        obs, a, y = self._critic_targets(batch, np.random.default_rng(0))
        x = self._q_input(obs, a)
        return float(np.mean([0.5 * np.mean((q(x)[:, 0] - y) ** 2) for q in self.q]))

    def _critic_targets(self, batch, rng):
        s, a, c, s1 = batch
        obs, obs1 = self.observe(s), self.observe(s1)
        eps = rng.standard_normal((obs1.shape[0], self.action_dim))
        a1, logp1, _ = self._sample(obs1, eps)
        x1 = self._q_input(obs1, a1)
        q1 = np.minimum(self.q_target[0](x1), self.q_target[1](x1))[:, 0]
        y = -c + self.config.gamma * (q1 - self.alpha * logp1)
        return obs, a.reshape(-1, self.action_dim), y

    def actor_loss_and_grads(self, obs, eps):
        """Actor loss mean(α log π(ã|s) - min_i Q_i(s, ã)) and its policy gradients.

        ``eps`` is the reparameterization noise, so the loss is a deterministic
        function of the policy weights.
        """
        B = obs.shape[0]
        a_new, logp, (mu, log_std, t_raw, std, u, t, jac, pcache) = self._sample(obs, eps)
        xa = self._q_input(obs, a_new)
        outs = [q.forward(xa) for q in self.q]
        q_vals = np.hstack([o[0] for o in outs])
        pick = np.argmin(q_vals, axis=1)
        dq_da = np.zeros((B, self.action_dim))
        for i, (q, (_, cache)) in enumerate(zip(self.q, outs)):
            mask = (pick == i).astype(float)[:, None]
            _, dx = q.backward(cache, mask)
            dq_da += dx[:, self.obs_dim:] / self.scale
        alpha = self.alpha
        loss = float(np.mean(alpha * logp - q_vals[np.arange(B), pick]))
        dlogp_du = 2.0 * t * (self.scale * (1.0 - t * t)) / jac
        dL_du = (alpha * dlogp_du - dq_da * self.scale * (1.0 - t * t)) / B
        dL_dmu = dL_du
        dL_dlogstd = -alpha / B + dL_du * std * eps
        dL_draw = dL_dlogstd * 0.5 * (LOG_STD_MAX - LOG_STD_MIN) * (1.0 - t_raw * t_raw)
        pgrads, _ = self.policy.backward(pcache, np.hstack([dL_dmu, dL_draw]))
        return loss, pgrads, logp

    # -- update -----------------------------------------------------------------

    def update(self, batch, rng) -> dict:
        """One SAC gradient step on ``batch`` = (states, actions, costs, next_states)."""
        cfg = self.config
        obs, a, y = self._critic_targets(batch, rng)
        B = obs.shape[0]
        x = self._q_input(obs, a)
        q_losses = []
        for q, opt in zip(self.q, self.q_opt):
            out, cache = q.forward(x)
            err = out[:, 0] - y
            q_losses.append(0.5 * float(np.mean(err * err)))
            grads, _ = q.backward(cache, (err / B)[:, None])
            opt.step(grads)

        eps = rng.standard_normal((B, self.action_dim))
        actor_loss, pgrads, logp = self.actor_loss_and_grads(obs, eps)
        self.policy_opt.step(pgrads)
        alpha = self.alpha

        # temperature: minimize -log α (log π + H̄)
        g_alpha = -float(np.mean(logp + self.target_entropy))
        self._alpha_t += 1
        b1, b2 = 0.9, 0.999
        self._alpha_m = b1 * self._alpha_m + (1 - b1) * g_alpha
        self._alpha_v = b2 * self._alpha_v + (1 - b2) * g_alpha * g_alpha
        mhat = self._alpha_m / (1 - b1**self._alpha_t)
        vhat = self._alpha_v / (1 - b2**self._alpha_t)
        self.log_alpha -= cfg.learning_rate * mhat / (np.sqrt(vhat) + 1e-8)

        for qt, q in zip(self.q_target, self.q):
            qt.polyak_update(q, cfg.tau)
        self.n_updates += 1
        return {"q_loss": float(np.mean(q_losses)), "actor_loss": actor_loss,
                "alpha": alpha, "entropy": -float(np.mean(logp))}


def sac_update(agent: SacAgent, buffers: ReplayBuffers, batch_size: int, steps: int, rng) -> list:
    """Run ``steps`` gradient steps on batches mixed from D_R and D_M.

    Returns one loss record per step.

    Raises
    ------
    BufferStateError
        If D_R is empty.
    """
    if len(buffers.real) == 0:
        raise BufferStateError("sac_update needs at least one real transition")
    trace = []
    for _ in range(steps):
        batch, _ = buffers.sample(rng, batch_size)
        trace.append(agent.update(batch, rng))
    return trace
