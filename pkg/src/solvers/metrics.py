"""
Residuals and quality measures for candidate rank vectors
"""
from dataclasses import dataclass, asdict
from typing import Dict, Union

import numpy as np

from src.errors import DimensionMismatch, InvalidK, NotOnSimplex
from src.rank_types import NormKind, RankVector
from src.solvers.graph_core import StochasticMatrix, transpose_apply
from src.solvers.validators import MatrixValidator

VectorLike = Union[RankVector, np.ndarray, list, tuple]


@dataclass(frozen=True)
class Residuals:
    l1: float
    l2: float
    linf: float
    f: float

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


def _values(p: VectorLike) -> np.ndarray:
    if isinstance(p, RankVector):
        return p.values
    return np.asarray(p, dtype=np.float64)


def _simplex_values(p: VectorLike) -> np.ndarray:
    values = _values(p)
    errors = MatrixValidator.validate_simplex(values)
    if errors:
        raise NotOnSimplex('; '.join(errors))
    return values


def residual_vector(matrix: StochasticMatrix, p: VectorLike) -> np.ndarray:
    """(P^T - I) p"""
    values = _values(p)
    return transpose_apply(matrix, values) - values


def game_objective(matrix: StochasticMatrix, p: VectorLike) -> float:
    """f(p) = max over the simplex of <u, (P^T - I) p>, i.e. the largest residual coordinate"""
    values = _simplex_values(p)
    r = transpose_apply(matrix, values) - values
    return max(float(r.max()), 0.0)


def residuals(matrix: StochasticMatrix, p: VectorLike) -> Residuals:
    values = _simplex_values(p)
    r = transpose_apply(matrix, values) - values
    return Residuals(
        l1=float(np.abs(r).sum()),
        l2=float(np.sqrt(np.dot(r, r))),
        linf=float(np.abs(r).max()),
        f=max(float(r.max()), 0.0),
    )


def distance(p: VectorLike, q: VectorLike, norm: NormKind = NormKind.L2) -> float:
    a, b = _values(p), _values(q)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot compare shapes {a.shape} and {b.shape}")
    d = a - b
    norm = NormKind(norm)
    if norm is NormKind.L1:
        return float(np.abs(d).sum())
    if norm is NormKind.LINF:
        return float(np.abs(d).max()) if d.size else 0.0
    return float(np.sqrt(np.dot(d, d)))


def distances(p: VectorLike, q: VectorLike) -> Dict[str, float]:
    return {kind.value: distance(p, q, kind) for kind in NormKind}


def topk_indices(p: VectorLike, k: int) -> np.ndarray:
    """Indices of the k largest entries; ties broken by ascending index"""
    values = _values(p)
    order = np.lexsort((np.arange(values.size), -values))
    return order[:k]


def topk_overlap(p: VectorLike, q: VectorLike, k: int) -> float:
    a, b = _values(p), _values(q)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot compare shapes {a.shape} and {b.shape}")
    if not (1 <= k <= a.size):
        raise InvalidK(f"k must lie in [1, {a.size}], got {k}")
    shared = np.intersect1d(topk_indices(a, k), topk_indices(b, k))
    return shared.size / k
