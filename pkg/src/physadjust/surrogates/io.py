"""Versioned on-disk format for fitted surrogates and dynamics models.

A file is a NumPy ``.npz`` archive. Array entries hold the model state and
a ``__meta__`` entry holds JSON with the format version, model kind, the
scalar state entries and, when known, a description of the physics model.
Physics callables cannot be stored; pass ``physics`` to :func:`load_model`
or let it be rebuilt from the stored description for the built-in models.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..physics import (
    DomainBox,
    FunctionModel,
    OdeStepConfig,
    PendulumModel,
    PendulumParams,
    PhysicsModel,
    forrester_physics,
)
from .ar1 import AR1CoKriging
from .base import SurrogateModel
from .dynamics import DynamicsModel
from .gp import CKA, GaussianProcess, GPBias, GPScale
from .rra import RRA

FORMAT_VERSION = 1
_META_KEY = "__meta__"

_CLASSES = {
    "zero-mean-gp": GaussianProcess,
    "phy-mean-gp": GaussianProcess,
    "gp-bias": GPBias,
    "gp-scale": GPScale,
    "cka": CKA,
    "ar1": AR1CoKriging,
    "rra": RRA,
}


class ModelFormatError(ValueError):
    pass


def _describe_physics(physics) -> dict | None:
    if isinstance(physics, PendulumModel):
        return {"type": "pendulum", "params": physics.describe(),
                "step_size": physics.step.step_size, "substeps": physics.step.substeps}
    if isinstance(physics, FunctionModel) and physics.name == "forrester_crude":
        return {"type": "forrester-crude"}
    return None


def _rebuild_physics(desc) -> PhysicsModel | None:
    if not desc:
        return None
    if desc["type"] == "pendulum":
        return PendulumModel(PendulumParams(**desc["params"]), OdeStepConfig(desc["step_size"], desc["substeps"]))
    if desc["type"] == "forrester-crude":
        return forrester_physics()
    return None


def _split(state: dict, prefix: str = ""):
    arrays, scalars = {}, {}
    for k, v in state.items():
        if isinstance(v, np.ndarray):
            arrays[prefix + k] = v
        elif isinstance(v, (bool, np.bool_)):
            scalars[prefix + k] = bool(v)
        elif isinstance(v, (int, np.integer)):
            scalars[prefix + k] = int(v)
        elif isinstance(v, (float, np.floating)):
            # JSON floats do not survive inf/nan; store as 0-d arrays instead
            arrays[prefix + k] = np.asarray(float(v))
        else:
            scalars[prefix + k] = v
    return arrays, scalars


def save_model(model, path, physics=None) -> Path:
    """Write a fitted SurrogateModel or DynamicsModel to ``path`` (``.npz``)."""
    path = Path(path)
    meta = {"format_version": FORMAT_VERSION}
    if isinstance(model, DynamicsModel):
        arrays, scalars = {}, {}
        for j, m in enumerate(model.per_dim_models):
            a, s = _split(m.to_state(), f"dim{j}.")
            arrays.update(a)
            scalars.update(s)
        meta.update(container="dynamics", kind=model.kind, input_dim=model.input_dim,
                    output_dim=model.output_dim, n_models=len(model.per_dim_models),
                    physics=_describe_physics(model.physics))
        if model.box is not None:
            arrays["box.lower"], arrays["box.upper"] = model.box.lower, model.box.upper
    elif isinstance(model, SurrogateModel):
        arrays, scalars = _split(model.to_state())
        meta.update(container="surrogate", kind=model.kind, physics=_describe_physics(physics))
    else:
        raise TypeError(f"cannot save object of type {type(model).__name__}")
    meta["scalars"] = scalars
    arrays[_META_KEY] = np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)
    try:
        with open(path, "wb") as fh:
            np.savez(fh, **arrays)
    except OSError as exc:
        raise OSError(f"could not write model to {path}: {exc}") from exc
    return path


def _state_for(data: dict, scalars: dict, prefix: str = "") -> dict:
    state = {}
    for k, v in data.items():
        if k.startswith(prefix):
            state[k[len(prefix):]] = v[()] if v.ndim == 0 else v
    for k, v in scalars.items():
        if k.startswith(prefix):
            state[k[len(prefix):]] = v
    return state


def _surrogate_from_state(state: dict, fp):
    kind = state.get("kind")
    if kind not in _CLASSES:
        raise ModelFormatError(f"unknown model kind {kind!r}")
    return _CLASSES[kind].from_state(state, fp)


def load_model(path, physics: PhysicsModel | None = None):
    """Read a model written by :func:`save_model`.

    ``physics`` supplies f_p; if omitted it is rebuilt from the stored
    description when possible, otherwise the model needs ``fp_values`` at
    prediction time.
    """
    path = Path(path)
    with np.load(path, allow_pickle=False) as npz:
        data = {k: npz[k] for k in npz.files}
    if _META_KEY not in data:
        raise ModelFormatError(f"{path} has no metadata entry")
    meta = json.loads(data.pop(_META_KEY).tobytes().decode())
    if meta.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format version {meta.get('format_version')!r}")
    physics = physics if physics is not None else _rebuild_physics(meta.get("physics"))
    scalars = meta["scalars"]
    if meta["container"] == "dynamics":
        box = None
        if "box.lower" in data:
            box = DomainBox(data.pop("box.lower"), data.pop("box.upper"))
        models = [
            _surrogate_from_state(_state_for(data, scalars, f"dim{j}."),
                                  physics.component(j) if physics is not None else None)
            for j in range(meta["n_models"])
        ]
        return DynamicsModel(meta["kind"], physics, models, meta["input_dim"], meta["output_dim"], box)
    fp = None
    if physics is not None:
        fp = physics.component(0) if hasattr(physics, "component") else physics
    return _surrogate_from_state(_state_for(data, scalars), fp)
