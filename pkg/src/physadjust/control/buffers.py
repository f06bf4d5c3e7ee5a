"""Separate FIFO buffers for real and model-generated experience."""

from __future__ import annotations

import numpy as np

from .env import Transition


class BufferStateError(RuntimeError):
    pass


class FifoBuffer:
    """Fixed-capacity ring buffer of transitions stored as arrays."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int = 1, model_generated: bool = False):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.model_generated = model_generated
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.costs = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self._next = 0
        self._size = 0

    def __len__(self):
        return self._size

    def add(self, t: Transition):
        if bool(t.is_model_generated) != self.model_generated:
            which = "model" if self.model_generated else "real"
            raise BufferStateError(f"{which} buffer rejected a transition with the wrong origin flag")
        i = self._next
        self.states[i] = t.state
        self.actions[i] = np.ravel(t.action)
        self.costs[i] = t.cost
        self.next_states[i] = t.next_state
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def extend(self, transitions):
        for t in transitions:
            self.add(t)

    def clear(self):
        self._next = 0
        self._size = 0

    def sample_indices(self, rng, n: int) -> np.ndarray:
        return rng.integers(0, self._size, size=n)

    def gather(self, idx):
        return self.states[idx], self.actions[idx], self.costs[idx], self.next_states[idx]

    def transitions(self) -> list:
        """Contents oldest first."""
        start = self._next if self._size == self.capacity else 0
        order = (start + np.arange(self._size)) % self.capacity
        return [
            Transition(self.states[i].copy(), self.actions[i].copy(), float(self.costs[i]),
                       self.next_states[i].copy(), self.model_generated)
            for i in order
        ]


def real_count(batch_size: int, model_available: bool) -> int:
    """Real tuples per batch: all of them without model data, else max(1, ⌊B/11⌋)."""
    if not model_available:
        return batch_size
    return max(1, batch_size // 11)


class ReplayBuffers:
    """D_R for real experience and D_M for model rollouts, mixed 1:10 when sampling."""

    def __init__(self, state_dim: int, action_dim: int = 1,
                 real_capacity: int = 100_000, model_capacity: int = 100_000):
        self.real = FifoBuffer(real_capacity, state_dim, action_dim, model_generated=False)
        self.model = FifoBuffer(model_capacity, state_dim, action_dim, model_generated=True)

    def add(self, t: Transition):
        (self.model if t.is_model_generated else self.real).add(t)

    def extend(self, transitions):
        for t in transitions:
            self.add(t)

    def sample(self, rng, batch_size: int):
        """Batch of (states, actions, costs, next_states) honouring the mixing ratio.

        Raises
        ------
        BufferStateError
            If the real buffer is empty.
        """
        if len(self.real) == 0:
            raise BufferStateError("cannot sample: real buffer is empty")
        n_real = real_count(batch_size, len(self.model) > 0)
        parts = [self.real.gather(self.real.sample_indices(rng, n_real))]
        if n_real < batch_size:
            parts.append(self.model.gather(self.model.sample_indices(rng, batch_size - n_real)))
        return tuple(np.concatenate(cols) for cols in zip(*parts)), n_real
