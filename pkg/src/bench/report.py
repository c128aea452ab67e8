"""
Run reports

A RunReport is one JSON object per solver run. Every report has the same key
set; fields that do not apply to the algorithm are null. Reports are checked
against REPORT_SCHEMA before they are written.
"""
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import jsonschema

from src.rank_types import RankVector

logger = logging.getLogger(__name__)

_NUMBER_OR_NULL = {'type': ['number', 'null']}
_INT_OR_NULL = {'type': ['integer', 'null']}
_NORMS = {
    'type': 'object',
    'required': ['l1', 'l2', 'linf'],
    'properties': {'l1': {'type': 'number'}, 'l2': {'type': 'number'}, 'linf': {'type': 'number'}},
    'additionalProperties': False,
}

REPORT_SCHEMA: Dict[str, Any] = {
    '$schema': 'http://json-schema.org/draft-07/schema#',
    'title': 'RunReport',
    'type': 'object',
    'required': [
        'algorithm', 'n', 'nnz', 'params', 'seed', 'iterations', 'trajectories',
        'wall_ms', 'counters', 'residuals', 'mass', 'topk', 'oracle', 'distances',
        'topk_overlap', 'status', 'notes',
    ],
    'additionalProperties': False,
    'properties': {
        'algorithm': {'type': 'string', 'enum': ['power', 'mcmc', 'gk', 'dense']},
        'n': {'type': 'integer', 'minimum': 1},
        'nnz': {'type': 'integer', 'minimum': 0},
        'params': {
            'type': 'object',
            'additionalProperties': {'type': ['number', 'string', 'integer', 'boolean', 'null']},
        },
        'seed': _INT_OR_NULL,
        'iterations': _INT_OR_NULL,
        'trajectories': _INT_OR_NULL,
        'wall_ms': {'type': 'number', 'minimum': 0},
        'counters': {'type': 'object', 'additionalProperties': {'type': ['number', 'null']}},
        'residuals': {
            'type': 'object',
            'required': ['l1', 'l2', 'linf', 'f'],
            'properties': {k: {'type': 'number', 'minimum': 0} for k in ('l1', 'l2', 'linf', 'f')},
            'additionalProperties': False,
        },
        'mass': _NUMBER_OR_NULL,
        'topk': {
            'type': 'array',
            'items': {
                'type': 'array',
                'items': [{'type': 'integer', 'minimum': 0}, {'type': 'number'}],
                'minItems': 2,
                'maxItems': 2,
            },
        },
        'oracle': {'type': ['string', 'null'], 'enum': ['dense', 'power', None]},
        'distances': {'oneOf': [{'type': 'null'}, _NORMS]},
        'topk_overlap': _NUMBER_OR_NULL,
        'status': {'type': 'string', 'enum': ['ok', 'not_converged', 'max_steps_exceeded']},
        'notes': {'type': 'array', 'items': {'type': 'string'}},
    },
}


@dataclass
class RunReport:
    """Full solver report"""

    algorithm: str
    n: int
    nnz: int
    params: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    iterations: Optional[int] = None
    trajectories: Optional[int] = None
    wall_ms: float = 0.0
    counters: Dict[str, Optional[float]] = field(default_factory=dict)
    residuals: Dict[str, float] = field(default_factory=dict)
    mass: Optional[float] = None
    topk: List[List[float]] = field(default_factory=list)
    oracle: Optional[str] = None
    distances: Optional[Dict[str, float]] = None
    topk_overlap: Optional[float] = None
    status: str = 'ok'
    notes: List[str] = field(default_factory=list)

    def set_topk(self, estimate: RankVector, k: int):
        self.topk = [[node, score] for node, score in estimate.top(k)]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def non_finite_fields(data: Any, path: str = '') -> List[str]:
    """Paths of every NaN/inf number in a nested report"""
    found: List[str] = []
    if isinstance(data, float):
        if not math.isfinite(data):
            found.append(path or '<root>')
    elif isinstance(data, dict):
        for key, value in data.items():
            found.extend(non_finite_fields(value, f"{path}.{key}" if path else str(key)))
    elif isinstance(data, (list, tuple)):
        for i, value in enumerate(data):
            found.extend(non_finite_fields(value, f"{path}[{i}]"))
    return found


def validate_report(report: Union[RunReport, Dict[str, Any]]) -> List[str]:
    """Return a list of schema or finiteness problems (empty when valid)"""
    data = report.to_dict() if isinstance(report, RunReport) else report
    validator = jsonschema.Draft7Validator(REPORT_SCHEMA)
    errors = [
        f"{'.'.join(str(p) for p in error.path) or '<root>'}: {error.message}"
        for error in sorted(validator.iter_errors(data), key=lambda e: list(e.path))
    ]
    errors.extend(f"{path}: not finite" for path in non_finite_fields(data))

    topk = data.get('topk') or []
    for (a_node, a_score), (b_node, b_score) in zip(topk, topk[1:]):
        if a_score < b_score or (a_score == b_score and a_node > b_node):
            errors.append("topk: not sorted by descending score with index tie-break")
            break
    return errors


def write_report(report: RunReport, path: Union[str, Path]) -> Path:
    """Validate and write the report as UTF-8 JSON"""
    errors = validate_report(report)
    if errors:
        raise jsonschema.ValidationError('; '.join(errors))

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(report.to_dict(), f, indent=2, ensure_ascii=False, allow_nan=False)
        f.write('\n')
    logger.info(f"Report written to {path}")
    return path
