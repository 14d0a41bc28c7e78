"""Interior point solver for convex conic programs with quadratic objectives.

    minimize    ½ xᵀPx + qᵀx
    subject to  Ax + s = b,  s ∈ K

P and A may be scipy sparse matrices, dense numpy arrays or ``CsrMatrix``.
P must hold both triangles.
"""

import numpy as np

from ._core import (
    Cone,
    ConeKind,
    CsrMatrix,
    Error,
    InfeasibleBoxBudget,
    ParseError,
    PatternMismatch,
    Precision,
    Problem,
    Result,
    Settings,
    Solver,
    Status,
    ValidationError,
    emit_problem,
    generate,
    parse_problem,
    read_problem,
    shifted_geomean,
)
from ._core import solve as _solve

__all__ = [
    "Cone", "ConeKind", "CsrMatrix", "Error", "InfeasibleBoxBudget", "ParseError", "PatternMismatch",
    "Precision", "Problem", "Result", "Settings", "Solver", "Status", "ValidationError", "as_csr",
    "emit_problem", "generate", "make_problem", "parse_problem", "read_problem", "shifted_geomean",
    "solve", "to_scipy",
]


def as_csr(matrix):
    """Convert a scipy sparse matrix or dense array to ``CsrMatrix``."""
    if isinstance(matrix, CsrMatrix):
        return matrix
    if hasattr(matrix, "tocsr"):
        csr = matrix.tocsr(copy=True)
        csr.sum_duplicates()
        csr.sort_indices()
        return CsrMatrix(csr.shape, csr.indptr.astype(np.int32), csr.indices.astype(np.int32),
                         csr.data.astype(np.float64))
    dense = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    rows, cols = np.nonzero(dense)
    indptr = np.zeros(dense.shape[0] + 1, dtype=np.int32)
    np.add.at(indptr, rows + 1, 1)
    return CsrMatrix(dense.shape, np.cumsum(indptr).astype(np.int32), cols.astype(np.int32), dense[rows, cols])


def to_scipy(matrix):
    """``CsrMatrix`` as a ``scipy.sparse.csr_matrix``."""
    from scipy.sparse import csr_matrix

    return csr_matrix((matrix.data, matrix.indices, matrix.indptr), shape=matrix.shape)


def make_problem(P, A, q, b, cones):
    """Validated ``Problem``; ``P=None`` means a zero objective Hessian."""
    A = as_csr(A)
    n = A.shape[1]
    P = CsrMatrix((n, n), [0] * (n + 1), [], []) if P is None else as_csr(P)
    return Problem(P, A, np.asarray(q, dtype=np.float64), np.asarray(b, dtype=np.float64), list(cones))


def solve(problem_or_P, A=None, q=None, b=None, cones=None, settings=None, **options):
    """Solve a ``Problem`` or the data ``(P, A, q, b, cones)``.

    Keyword options override fields of ``settings``, e.g. ``eps_feas=1e-8``.
    """
    problem = problem_or_P if isinstance(problem_or_P, Problem) else make_problem(problem_or_P, A, q, b, cones)
    settings = settings or Settings()
    for key, value in options.items():
        if not hasattr(settings, key):
            raise TypeError(f"unknown setting '{key}'")
        setattr(settings, key, value)
    return _solve(problem, settings)
