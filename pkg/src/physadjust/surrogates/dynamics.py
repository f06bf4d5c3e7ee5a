"""Multi-output dynamics model: one scalar surrogate per state dimension.

Each dimension j is fitted on column j of the next-state matrix and uses
component j of the physics model's predicted next state as its f_p.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from ..physics import DomainBox, PhysicsModel
from .base import FitConfig, InvalidConfigError, PredictiveDistribution, SurrogateModel
from .registry import make_model

#: kind for the zero-variance model that returns f_p unchanged
PHYSICS_KIND = "physics"


def derived_config(config: FitConfig, dim: int) -> FitConfig:
    """Copy of ``config`` whose seeds are derived from the root seed and ``dim``."""
    seed = int(np.random.SeedSequence([config.seed, dim]).generate_state(1)[0])
    optimizer = dataclasses.replace(config.optimizer, seed=seed)
    return dataclasses.replace(config, seed=seed, optimizer=optimizer)


def transitions_to_arrays(transitions, state_dim: int | None = None):
    """Stack transitions into X = [s, a] rows and Y = s' rows.

    Anything with ``state``, ``action`` and ``next_state`` attributes works.

    Raises
    ------
    InvalidConfigError
        If state, action or next-state sizes differ between transitions.
    """
    rows, targets = [], []
    shape = None
    for t in transitions:
        s = np.atleast_1d(np.asarray(t.state, dtype=float))
        a = np.atleast_1d(np.asarray(t.action, dtype=float))
        s1 = np.atleast_1d(np.asarray(t.next_state, dtype=float))
        this = (s.size, a.size, s1.size)
        if shape is None:
            shape = this
        if this != shape or s.size != s1.size:
            raise InvalidConfigError(f"inconsistent transition dimensions {this}, expected {shape}")
        rows.append(np.concatenate([s, a]))
        targets.append(s1)
    if not rows:
        if state_dim is None:
            raise InvalidConfigError("state_dim is needed when there are no transitions")
        return np.zeros((0, state_dim + 1)), np.zeros((0, state_dim))
    if state_dim is not None and shape[0] != state_dim:
        raise InvalidConfigError(f"transitions have state size {shape[0]}, expected {state_dim}")
    return np.array(rows), np.array(targets)


@dataclass
class DynamicsModel:
    """Independent per-dimension surrogates over (state, action) inputs.

    ``box`` bounds the state; predictive means are clipped into it so that
    rollouts cannot leave the region the physics model is valid in.
    """

    kind: str
    physics: PhysicsModel
    per_dim_models: list = field(default_factory=list)
    input_dim: int = 5
    output_dim: int = 4
    box: DomainBox | None = None

    def predict(self, X) -> PredictiveDistribution:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.input_dim:
            raise InvalidConfigError(f"expected {self.input_dim} input columns, got {X.shape[1]}")
        if not np.all(np.isfinite(X)):
            raise InvalidConfigError("non-finite dynamics input")
        fp = np.asarray(self.physics.evaluate(X), dtype=float).reshape(X.shape[0], self.output_dim)
        if self.kind == PHYSICS_KIND:
            mean, var = fp, np.zeros_like(fp)
        else:
            mean = np.empty_like(fp)
            var = np.empty_like(fp)
            for j, model in enumerate(self.per_dim_models):
                pd = model.predict(X, fp_values=fp[:, j])
                mean[:, j], var[:, j] = pd.mean, pd.variance
        if self.box is not None:
            mean = self.box.clip(mean)
        return PredictiveDistribution(mean, var)

    def fit_nlml(self) -> list:
        """Per-dimension NLML at the fitted hyperparameters (NaN where undefined)."""
        return [float(getattr(m, "nlml_value", np.nan)) for m in self.per_dim_models]


def fit_dynamics(transitions, physics: PhysicsModel, model_kind: str,
                 config: FitConfig | None = None, box: DomainBox | None = None,
                 warm_start: DynamicsModel | None = None) -> DynamicsModel:
    """Fit one surrogate per next-state dimension.

    Parameters
    ----------
    transitions : sequence
        Objects with ``state``, ``action`` and ``next_state``; may be empty
        for kinds that accept a prior-only fit.
    physics : PhysicsModel
        Maps (n, d) state-action rows to (n, m) predicted next states.
    model_kind : str
        Any surrogate kind, or ``"physics"`` for f_p with zero variance.
    warm_start : DynamicsModel, optional
        A previous fit of the same kind; its GP hyperparameters seed the
        optimizer for each dimension.
    """
    config = config or FitConfig()
    m = int(physics.output_dim)
    d = int(physics.input_dim)
    X, Y = transitions_to_arrays(transitions, state_dim=m)
    if X.shape[1] != d:
        raise InvalidConfigError(f"physics expects {d} inputs, transitions give {X.shape[1]}")
    model = DynamicsModel(model_kind, physics, [], d, m, box)
    if model_kind == PHYSICS_KIND:
        return model
    fp = np.asarray(physics.evaluate(X), dtype=float).reshape(X.shape[0], m) if len(X) else np.zeros((0, m))
    for j in range(m):
        init = None
        if warm_start is not None and warm_start.kind == model_kind:
            init = getattr(warm_start.per_dim_models[j], "theta", None)
        surrogate: SurrogateModel = make_model(model_kind, physics.component(j), derived_config(config, j),
                                               **({"init_theta": init} if init is not None else {}))
        surrogate.fit(X, Y[:, j], fp_values=fp[:, j])
        model.per_dim_models.append(surrogate)
    return model


def predict_next_state(model: DynamicsModel, s, a) -> PredictiveDistribution:
    """Next-state distribution for states ``s`` (n, m) and actions ``a`` (n,) or (n, k)."""
    s = np.atleast_2d(np.asarray(s, dtype=float))
    a = np.asarray(a, dtype=float).reshape(s.shape[0], -1)
    return model.predict(np.hstack([s, a]))
