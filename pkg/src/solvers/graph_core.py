"""
Sparse row-stochastic matrices built from directed graphs

A StochasticMatrix stores its link part in both CSR (row) and CSC (column)
layout. Teleport damping adds teleport_mass/n to every entry and a uniformly
completed dangling row i adds dangling_mass[i]/n to each entry of row i. Neither
uniform part is materialised; consumers add them analytically.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from src.errors import (
    DimensionMismatch,
    DimensionTooLarge,
    EdgeListFormatError,
    EmptyGraph,
    IndexOutOfRange,
    NegativeWeight,
    NotStochastic,
)
from src.rank_types import DampingMode, DanglingPolicy
from src.solvers.config import DampingSpec
from src.solvers.validators import MatrixValidator

logger = logging.getLogger(__name__)

DENSE_LIMIT = 2000
NODE_COUNT_DIRECTIVE = '#n'


@dataclass
class AdjacencyGraph:
    """Directed graph on nodes 0..n-1; duplicate edges are merged by summing weights"""

    n: int
    edges: List[Tuple[int, int]]
    weights: Optional[List[float]] = None

    def __post_init__(self):
        if self.n <= 0:
            raise EmptyGraph(f"graph needs at least one node, got n={self.n}")

        if self.weights is not None and len(self.weights) != len(self.edges):
            raise DimensionMismatch(
                f"{len(self.edges)} edges but {len(self.weights)} weights"
            )

        merged: Dict[Tuple[int, int], float] = {}
        for idx, (src, dst) in enumerate(self.edges):
            weight = None if self.weights is None else float(self.weights[idx])
            errors = MatrixValidator.validate_edge(int(src), int(dst), self.n, weight)
            if errors:
                message = '; '.join(errors)
                if weight is not None and not (math.isfinite(weight) and weight >= 0):
                    raise NegativeWeight(message)
                raise IndexOutOfRange(message)
            key = (int(src), int(dst))
            merged[key] = merged.get(key, 0.0) + (1.0 if weight is None else weight)

        if len(merged) != len(self.edges):
            logger.debug(f"Merged {len(self.edges) - len(merged)} duplicate edges")

        self.edges = list(merged.keys())
        if self.weights is not None or any(w != 1.0 for w in merged.values()):
            self.weights = list(merged.values())

    @property
    def edge_weights(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(len(self.edges), dtype=np.float64)
        return np.asarray(self.weights, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """Row-stochastic P = link + (teleport_mass + dangling_mass_i)/n on row i, in dual layout

    Both uniform parts are implicit: teleport_mass is shared by every row,
    dangling_mass holds the per-row mass of uniformly completed dangling rows.
    """

    rows: sp.csr_matrix
    cols: sp.csc_matrix
    teleport_mass: float = 0.0
    mode: Optional[DampingMode] = None
    delta: float = 1.0
    metadata: Dict[str, object] = field(default_factory=dict)
    dangling_mass: Optional[np.ndarray] = None

    @classmethod
    def from_link(cls, link, teleport_mass: float = 0.0, mode: Optional[DampingMode] = None,
                  delta: float = 1.0, metadata: Optional[Dict[str, object]] = None,
                  dangling_mass: Optional[np.ndarray] = None) -> 'StochasticMatrix':
        rows = sp.csr_matrix(link, dtype=np.float64, copy=True)
        rows.eliminate_zeros()
        rows.sort_indices()
        cols = rows.tocsc()
        cols.sort_indices()

        if dangling_mass is not None:
            dangling_mass = np.array(dangling_mass, dtype=np.float64)
            if dangling_mass.shape == (rows.shape[0],) and not dangling_mass.any():
                dangling_mass = None

        errors = MatrixValidator.validate_stochastic(rows, teleport_mass, dangling_mass)
        if rows.shape[0] <= 100:
            errors.extend(MatrixValidator.validate_layouts(rows, cols))
        if errors:
            raise NotStochastic('; '.join(errors))

        arrays = [rows.data, rows.indices, rows.indptr, cols.data, cols.indices, cols.indptr]
        if dangling_mass is not None:
            arrays.append(dangling_mass)
        for arr in arrays:
            arr.setflags(write=False)

        return cls(rows, cols, float(teleport_mass), mode, float(delta), dict(metadata or {}), dangling_mass)

    @property
    def n(self) -> int:
        return int(self.rows.shape[0])

    @property
    def nnz(self) -> int:
        """Stored nonzeros of the link part (the implicit uniform parts are not counted)"""
        return int(self.rows.nnz)

    @property
    def is_teleport(self) -> bool:
        return self.teleport_mass > 0.0

    @cached_property
    def dangling_rows(self) -> np.ndarray:
        """Rows carrying implicit dangling mass, ascending"""
        if self.dangling_mass is None:
            return np.zeros(0, dtype=np.int64)
        return np.flatnonzero(self.dangling_mass)

    @property
    def gap_lower_bound(self) -> Optional[float]:
        """Known spectral-gap lower bound, or None when unknown"""
        if self.mode is DampingMode.TELEPORT:
            return 1.0 - self.delta
        return None

    @property
    def max_degree(self) -> int:
        """Largest number of stored nonzeros in any row or column"""
        if self.nnz == 0:
            return 0
        return int(max(np.diff(self.rows.indptr).max(), np.diff(self.cols.indptr).max()))

    def jump_mass(self, i: int) -> float:
        """Mass row i spreads uniformly over all n states"""
        if self.dangling_mass is None:
            return self.teleport_mass
        return self.teleport_mass + float(self.dangling_mass[i])

    def row(self, i: int) -> Tuple[np.ndarray, np.ndarray]:
        """(columns, values) of the stored part of row i"""
        start, end = self.rows.indptr[i], self.rows.indptr[i + 1]
        return self.rows.indices[start:end], self.rows.data[start:end]

    def column(self, j: int) -> Tuple[np.ndarray, np.ndarray]:
        """(rows, values) of the stored part of column j"""
        start, end = self.cols.indptr[j], self.cols.indptr[j + 1]
        return self.cols.indices[start:end], self.cols.data[start:end]

    def completed_column(self, j: int) -> Tuple[np.ndarray, np.ndarray]:
        """(rows, values) of column j with dangling mass added; teleport part excluded"""
        idx, vals = self.column(j)
        dangling = self.dangling_rows
        if not dangling.size:
            return idx, vals
        idx = np.concatenate([idx, dangling])
        vals = np.concatenate([vals, self.dangling_mass[dangling] / self.n])
        order = np.argsort(idx, kind='stable')
        idx, vals = idx[order], vals[order]
        idx, starts = np.unique(idx, return_index=True)
        return idx, np.add.reduceat(vals, starts)

    def dense_row(self, i: int) -> np.ndarray:
        out = np.full(self.n, self.jump_mass(i) / self.n)
        idx, vals = self.row(i)
        out[idx] += vals
        return out

    def dense_column(self, j: int) -> np.ndarray:
        out = np.full(self.n, self.teleport_mass / self.n)
        if self.dangling_mass is not None:
            out += self.dangling_mass / self.n
        idx, vals = self.column(j)
        out[idx] += vals
        return out

    def to_dense(self, layout: str = 'rows') -> np.ndarray:
        if self.n > DENSE_LIMIT:
            raise DimensionTooLarge(f"refusing to densify n={self.n} > {DENSE_LIMIT}")
        source = self.rows if layout == 'rows' else self.cols
        dense = source.toarray() + self.teleport_mass / self.n
        if self.dangling_mass is not None:
            dense += self.dangling_mass[:, None] / self.n
        return dense


def from_edge_list(raw: AdjacencyGraph,
                   dangling: DanglingPolicy = DanglingPolicy.UNIFORM) -> StochasticMatrix:
    """Normalise out-weights of each row; complete dangling rows per policy"""
    n = raw.n
    weights = raw.edge_weights
    if raw.edges:
        src = np.fromiter((e[0] for e in raw.edges), dtype=np.int64, count=len(raw.edges))
        dst = np.fromiter((e[1] for e in raw.edges), dtype=np.int64, count=len(raw.edges))
    else:
        src = dst = np.zeros(0, dtype=np.int64)

    out_weight = np.bincount(src, weights=weights, minlength=n)
    dangling_rows = np.flatnonzero(out_weight <= 0)
    zero_weight_rows = np.intersect1d(dangling_rows, src)
    if zero_weight_rows.size:
        logger.warning(f"{zero_weight_rows.size} rows have edges but zero out-weight; treated as dangling")

    keep = out_weight[src] > 0
    values = weights[keep] / out_weight[src[keep]]
    row_idx, col_idx = src[keep], dst[keep]

    dangling_mass = None
    if dangling_rows.size:
        logger.info(f"Completing {dangling_rows.size} dangling rows with policy '{dangling.value}'")
        if dangling is DanglingPolicy.UNIFORM:
            dangling_mass = np.zeros(n)
            dangling_mass[dangling_rows] = 1.0
        else:
            row_idx = np.concatenate([row_idx, dangling_rows])
            col_idx = np.concatenate([col_idx, dangling_rows])
            values = np.concatenate([values, np.ones(dangling_rows.size)])

    link = sp.coo_matrix((values, (row_idx, col_idx)), shape=(n, n)).tocsr()
    metadata = {'dangling': dangling.value, 'dangling_rows': int(dangling_rows.size)}
    matrix = StochasticMatrix.from_link(link, metadata=metadata, dangling_mass=dangling_mass)
    logger.debug(f"Built P~ with n={n}, nnz={matrix.nnz}")
    return matrix


def apply_damping(base: StochasticMatrix, spec: DampingSpec) -> StochasticMatrix:
    """lazy: (1-d) I + d P~ ; teleport: (1-d)/n 11^T + d P~ with the rank-one part implicit"""
    delta = spec.delta
    metadata = dict(base.metadata)
    metadata.update({'damping_mode': spec.mode.value, 'delta': delta})
    if spec.mode is DampingMode.TELEPORT:
        metadata['gap_lower_bound'] = 1.0 - delta
    else:
        metadata.pop('gap_lower_bound', None)

    if delta == 1.0:
        return StochasticMatrix(base.rows, base.cols, base.teleport_mass, spec.mode, 1.0, metadata,
                                base.dangling_mass)

    if spec.mode is DampingMode.LAZY:
        link = (1.0 - delta) * sp.identity(base.n, format='csr') + delta * base.rows
        teleport_mass = delta * base.teleport_mass
    else:
        link = delta * base.rows
        teleport_mass = (1.0 - delta) + delta * base.teleport_mass

    dangling_mass = None if base.dangling_mass is None else delta * base.dangling_mass
    return StochasticMatrix.from_link(link, teleport_mass, spec.mode, delta, metadata, dangling_mass)


def transpose_apply(matrix: StochasticMatrix, p) -> np.ndarray:
    """P^T p, adding the implicit uniform terms (teleport_mass sum(p) + dangling_mass . p) / n"""
    vec = np.asarray(p, dtype=np.float64)
    if vec.shape != (matrix.n,):
        raise DimensionMismatch(f"expected vector of length {matrix.n}, got shape {vec.shape}")

    out = matrix.cols.T @ vec
    jump = matrix.teleport_mass * vec.sum()
    if matrix.dangling_mass is not None:
        jump += float(matrix.dangling_mass @ vec)
    if jump:
        out += jump / matrix.n
    return out


def read_edge_list(path: Union[str, Path], weighted: Optional[bool] = None) -> AdjacencyGraph:
    """Parse `src dst [weight]` lines; `#` comments; `#n N` fixes the node count"""
    edges: List[Tuple[int, int]] = []
    weights: List[float] = []
    any_weight = False
    declared_n: Optional[int] = None

    with open(path, 'r', encoding='utf-8') as f:
        for line_number, raw_line in enumerate(f, start=1):
            line = MatrixValidator.sanitize_line(raw_line)
            if not line:
                continue

            if line.startswith('#'):
                parts = line.split()
                if parts[0] == NODE_COUNT_DIRECTIVE:
                    if len(parts) != 2 or not parts[1].isdigit():
                        raise EdgeListFormatError(line_number, raw_line, "bad node-count directive")
                    declared_n = int(parts[1])
                continue

            parts = line.split()
            if len(parts) not in (2, 3):
                raise EdgeListFormatError(line_number, raw_line, "expected 'src dst [weight]'")
            try:
                src, dst = int(parts[0]), int(parts[1])
                weight = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as e:
                raise EdgeListFormatError(line_number, raw_line, str(e)) from e

            if src < 0 or dst < 0:
                raise IndexOutOfRange(f"line {line_number}: negative node id")
            any_weight = any_weight or len(parts) == 3
            edges.append((src, dst))
            weights.append(weight)

    if declared_n is not None:
        n = declared_n
    else:
        n = max((max(s, d) for s, d in edges), default=-1) + 1

    use_weights = any_weight if weighted is None else weighted
    logger.info(f"Read {len(edges)} edges on {n} nodes from {path}")
    return AdjacencyGraph(n, edges, weights if use_weights else None)


def write_edge_list(graph: AdjacencyGraph, path: Union[str, Path]) -> None:
    """Write the graph with a `#n` directive; output is byte-stable for equal graphs"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(f"{NODE_COUNT_DIRECTIVE} {graph.n}\n")
        if graph.weights is None:
            for src, dst in graph.edges:
                f.write(f"{src} {dst}\n")
        else:
            for (src, dst), weight in zip(graph.edges, graph.weights):
                f.write(f"{src} {dst} {weight!r}\n")
