"""Concrete stationary sources and a config-driven factory."""

from __future__ import annotations

from typing import Any, Mapping

from ..errors import ParameterError
from .base import ShiftModel, ratio
from .bernoulli import BernoulliModel
from .gauss import GaussModel
from .gibbs import GibbsMarkovModel
from .group import GroupConvolutionModel
from .successor import SuccessorModel

__all__ = [
    "ShiftModel",
    "BernoulliModel",
    "GibbsMarkovModel",
    "GaussModel",
    "GroupConvolutionModel",
    "SuccessorModel",
    "model_from_config",
    "ratio",
]

_REGISTRY = {
    "bernoulli": (BernoulliModel, ("probs",), ()),
    "gibbs": (GibbsMarkovModel, ("potential",), ("admissible",)),
    "gauss": (GaussModel, (), ("truncation",)),
    "group": (GroupConvolutionModel, ("moduli", "probs", "window"), ("max_enumeration",)),
    "successor": (SuccessorModel, (), ("truncation",)),
}


def model_from_config(config: Mapping[str, Any]) -> ShiftModel:
    """Build a model from ``{"model": name, **params}``.

    Unknown names, missing parameters and unexpected keys are all
    parameter errors so that typos in config files surface early.
    """
    if isinstance(config, ShiftModel):
        return config
    try:
        name = config["model"]
    except (KeyError, TypeError):
        raise ParameterError("model config needs a 'model' key") from None
    if name not in _REGISTRY:
        raise ParameterError(f"unknown model {name!r}; choose from {sorted(_REGISTRY)}")
    cls, required, optional = _REGISTRY[name]
    params = {k: v for k, v in config.items() if k != "model"}
    missing = [k for k in required if k not in params]
    if missing:
        raise ParameterError(f"{name} model missing parameters: {', '.join(missing)}")
    extra = sorted(set(params) - set(required) - set(optional))
    if extra:
        raise ParameterError(f"{name} model got unexpected parameters: {', '.join(extra)}")
    return cls(**params)
