"""
Validation utilities for matrices, weight vectors and simplex points
"""
import math
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp


ROW_SUM_TOL = 1e-12
SIMPLEX_SUM_TOL = 1e-6
SIMPLEX_ENTRY_FLOOR = -1e-12


class MatrixValidator:
    """Validates inputs before they reach a solver"""

    @staticmethod
    def validate_edge(src: int, dst: int, n: int, weight: Optional[float] = None) -> List[str]:
        """Validate one (src, dst[, weight]) edge"""
        errors = []

        if not (0 <= src < n):
            errors.append(f"source {src} outside [0, {n})")
        if not (0 <= dst < n):
            errors.append(f"target {dst} outside [0, {n})")

        if weight is not None:
            if not math.isfinite(weight):
                errors.append(f"edge ({src}, {dst}) has non-finite weight {weight}")
            elif weight < 0:
                errors.append(f"edge ({src}, {dst}) has negative weight {weight}")

        return errors

    @staticmethod
    def validate_weights(weights: Sequence[float]) -> List[str]:
        """Validate leaf weights for a sampling tree"""
        errors = []

        arr = np.asarray(weights, dtype=np.float64)
        if arr.size == 0:
            errors.append("weight list is empty")
            return errors

        if not np.all(np.isfinite(arr)):
            errors.append("weight list contains non-finite values")
        if np.any(arr < 0):
            errors.append(f"weight list contains negative value {arr.min()}")

        return errors

    @staticmethod
    def validate_stochastic(link: sp.csr_matrix, teleport_mass: float = 0.0,
                            dangling_mass: Optional[np.ndarray] = None,
                            tol: float = ROW_SUM_TOL) -> List[str]:
        """Validate the row-stochastic invariants of link + (teleport_mass + dangling_mass)/n * 11^T"""
        errors = []

        n = link.shape[0]
        if link.shape != (n, n):
            errors.append(f"matrix is not square: {link.shape}")
            return errors

        if not (0.0 <= teleport_mass <= 1.0):
            errors.append(f"teleport mass {teleport_mass} outside [0, 1]")

        jump = np.full(n, float(teleport_mass))
        if dangling_mass is not None:
            if dangling_mass.shape != (n,):
                errors.append(f"dangling mass has shape {dangling_mass.shape}, expected ({n},)")
                return errors
            if not np.all(np.isfinite(dangling_mass)) or dangling_mass.min() < 0:
                errors.append("dangling mass must be finite and nonnegative")
                return errors
            jump += dangling_mass

        if link.nnz:
            low = float(link.data.min())
            if low < 0:
                errors.append(f"negative entry {low}")
            row_max = np.asarray(link.max(axis=1).todense()).ravel() + jump / n
            high = int(np.argmax(row_max))
            if row_max[high] > 1.0 + tol:
                errors.append(f"entry {row_max[high]} in row {high} exceeds 1")

        row_sums = np.asarray(link.sum(axis=1)).ravel() + jump
        worst = int(np.argmax(np.abs(row_sums - 1.0)))
        if abs(row_sums[worst] - 1.0) > tol:
            errors.append(f"row {worst} sums to {row_sums[worst]!r}")

        return errors

    @staticmethod
    def validate_layouts(rows: sp.csr_matrix, cols: sp.csc_matrix) -> List[str]:
        """Check that row and column layouts encode the identical matrix"""
        errors = []

        if rows.shape != cols.shape:
            errors.append(f"layout shapes differ: {rows.shape} vs {cols.shape}")
            return errors

        diff = (rows - cols.tocsr())
        diff.eliminate_zeros()
        if diff.nnz:
            errors.append(f"row and column layouts differ in {diff.nnz} entries")

        return errors

    @staticmethod
    def validate_simplex(values, sum_tol: float = SIMPLEX_SUM_TOL,
                         floor: float = SIMPLEX_ENTRY_FLOOR) -> List[str]:
        """Validate simplex membership with the metric tolerances"""
        errors = []

        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            errors.append(f"expected a non-empty vector, got shape {arr.shape}")
            return errors

        if not np.all(np.isfinite(arr)):
            errors.append("vector contains non-finite values")
            return errors

        if arr.min() < floor:
            errors.append(f"entry {int(arr.argmin())} is negative ({arr.min():.3e})")

        total = float(arr.sum())
        if abs(total - 1.0) > sum_tol:
            errors.append(f"entries sum to {total!r}")

        return errors

    @staticmethod
    def sanitize_line(line: str) -> str:
        """Strip null bytes, BOM and surrounding whitespace from an input line"""
        if not line:
            return ""

        line = line.replace('\x00', '').lstrip('\ufeff')
        return line.strip()
