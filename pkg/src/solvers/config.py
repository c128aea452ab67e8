"""
Solver configuration models

pydantic models for the damping construction and the two randomized solvers.
Validation failures surface as InvalidConfig (InvalidDelta for damping).
"""
import logging
from typing import Any, Dict, Optional, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.errors import InvalidConfig, InvalidDelta
from src.rank_types import CountRule, DampingMode, McmcMode, StartPolicy

logger = logging.getLogger(__name__)

ModelT = TypeVar('ModelT', bound=BaseModel)


class DampingSpec(BaseModel):
    """(delta, mode) pair for P = (1-delta) X + delta P~"""

    model_config = ConfigDict(frozen=True)

    delta: float
    mode: DampingMode = DampingMode.TELEPORT

    @field_validator('delta')
    @classmethod
    def _delta_in_range(cls, value: float) -> float:
        if not (0.0 < value <= 1.0):
            raise ValueError(f"delta must lie in (0, 1], got {value}")
        return value

    @classmethod
    def create(cls, delta: float, mode: Any = DampingMode.TELEPORT) -> 'DampingSpec':
        try:
            return cls(delta=delta, mode=mode)
        except ValidationError as e:
            raise InvalidDelta(_first_error(e)) from e


class McmcConfig(BaseModel):
    """Random-walk estimator parameters"""

    model_config = ConfigDict(frozen=True)

    eps: float = Field(gt=0)
    sigma: float = Field(gt=0, lt=1)
    alpha: float = Field(gt=0, le=1)
    mode: McmcMode = McmcMode.SINGLE
    c_burn: float = Field(default=1.0, ge=0)
    c_total: float = Field(default=1.0, gt=0)
    start: StartPolicy = StartPolicy.NODE_1
    tau: int = Field(default=100, ge=1)
    tol_adapt: float = Field(default=0.01, gt=0)
    max_steps: Optional[int] = Field(default=None, ge=1)
    # explicit overrides of the formula-derived counts (parallel mode)
    trajectories: Optional[int] = Field(default=None, ge=1)
    burn_in: Optional[int] = Field(default=None, ge=0)


class GkConfig(BaseModel):
    """Grigoriadis-Khachiyan solver parameters"""

    model_config = ConfigDict(frozen=True)

    eps: float = Field(gt=0, le=1)
    sigma: float = Field(gt=0, lt=1)
    max_iter: Optional[int] = Field(default=None, ge=1)
    trace_every: Optional[int] = Field(default=None, ge=1)
    count_rule: CountRule = CountRule.STANDARD


def build_config(model_cls: Type[ModelT], values: Dict[str, Any]) -> ModelT:
    """Instantiate a config model, dropping None values so defaults apply"""
    clean = {k: v for k, v in values.items() if v is not None}
    try:
        return model_cls(**clean)
    except ValidationError as e:
        logger.debug(f"Rejected {model_cls.__name__} values {clean}: {e}")
        raise InvalidConfig(f"{model_cls.__name__}: {_first_error(e)}") from e


def _first_error(error: ValidationError) -> str:
    details = error.errors()
    if not details:
        return str(error)
    first = details[0]
    location = '.'.join(str(part) for part in first.get('loc', ()))
    return f"{location}: {first.get('msg')}" if location else first.get('msg', str(error))
