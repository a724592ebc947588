"""Linear algebra over GF(2).

Sparse work uses Python ints as bit-vectors: bit i of a column is the
coefficient of the i-th basis element and columns are reduced against pivots
keyed by their least set bit. The dense helpers work on numpy uint8 matrices
with XOR row operations and back the boundary-matrix view of complexes.
"""

from collections.abc import Iterable, Sequence

import numpy as np
import numpy.typing as npt


def lowest_bit(vector: int) -> int:
    """Index of the least set bit (the leading face)."""
    return (vector & -vector).bit_length() - 1


def bits(vector: int) -> list[int]:
    """Indices of the set bits, ascending."""
    indices = []
    while vector:
        low = vector & -vector
        indices.append(low.bit_length() - 1)
        vector ^= low
    return indices


class PivotBasis:
    """Reduced GF(2) vectors keyed by their leading bit."""

    def __init__(self) -> None:
        self._pivots: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self._pivots)

    def reduce(self, vector: int) -> int:
        """Eliminate leading bits against the basis; 0 iff vector is in the span."""
        while vector:
            pivot = self._pivots.get(lowest_bit(vector))
            if pivot is None:
                return vector
            vector ^= pivot
        return 0

    def add(self, vector: int) -> int:
        """Insert a vector; returns its reduced form (0 if it was dependent)."""
        reduced = self.reduce(vector)
        if reduced:
            self._pivots[lowest_bit(reduced)] = reduced
        return reduced


def rank(columns: Iterable[int]) -> int:
    """GF(2) rank of bit-vector columns."""
    basis = PivotBasis()
    for column in columns:
        basis.add(column)
    return len(basis)


def kernel_basis(columns: Sequence[int]) -> list[int]:
    """Basis of the null space; each vector is a bitmask over column indices."""
    pivots: dict[int, tuple[int, int]] = {}
    kernel = []
    for index, column in enumerate(columns):
        vector, combination = column, 1 << index
        while vector:
            low = lowest_bit(vector)
            hit = pivots.get(low)
            if hit is None:
                pivots[low] = (vector, combination)
                break
            vector ^= hit[0]
            combination ^= hit[1]
        if not vector:
            kernel.append(combination)
    return kernel


def homology_representatives(cycle_space: Sequence[int], boundaries: Iterable[int]) -> list[int]:
    """One cycle per homology class basis vector.

    cycle_space holds the boundary columns of the d-faces (over (d-1)-faces);
    boundaries holds the boundary columns of the (d+1)-faces (over d-faces).
    Every kernel vector is reduced against the boundaries and the earlier
    representatives; survivors are returned ordered by leading face.
    """
    basis = PivotBasis()
    for column in boundaries:
        basis.add(column)
    representatives = []
    for cycle in kernel_basis(cycle_space):
        reduced = basis.add(cycle)
        if reduced:
            representatives.append(reduced)
    return sorted(representatives, key=lowest_bit)


def to_dense(columns: Sequence[int], n_rows: int) -> npt.NDArray[np.uint8]:
    """Dense uint8 matrix whose j-th column is the j-th bit-vector."""
    matrix = np.zeros((n_rows, len(columns)), dtype=np.uint8)
    for j, column in enumerate(columns):
        for i in bits(column):
            matrix[i, j] = 1
    return matrix


def row_echelon(matrix: npt.ArrayLike) -> tuple[npt.NDArray[np.uint8], list[int]]:
    """Row-reduce a binary matrix over GF(2); returns (R, pivot columns)."""
    reduced = (np.asarray(matrix, dtype=np.uint8) % 2).copy()
    if reduced.ndim != 2:
        raise ValueError("row_echelon expects a 2-d matrix")
    m, n = reduced.shape
    pivot_cols: list[int] = []
    pivot_row = 0
    for col in range(n):
        if pivot_row == m:
            break
        candidates = np.nonzero(reduced[pivot_row:, col])[0]
        if candidates.size == 0:
            continue
        found = pivot_row + int(candidates[0])
        if found != pivot_row:
            reduced[[pivot_row, found]] = reduced[[found, pivot_row]]
        below = np.nonzero(reduced[pivot_row + 1 :, col])[0] + pivot_row + 1
        reduced[below] ^= reduced[pivot_row]
        pivot_cols.append(col)
        pivot_row += 1
    return reduced, pivot_cols


def dense_rank(matrix: npt.ArrayLike) -> int:
    """GF(2) rank of a dense binary matrix."""
    _, pivot_cols = row_echelon(matrix)
    return len(pivot_cols)
