# -*- coding: utf-8 -*-
"""
Dense linear programming kernel

Two-phase full-tableau simplex on doubles with Bland's rule for both the
entering and the leaving variable. Every infimum in the package (N-norm,
order-unit, sum and quotient norms, generating witnesses) is compiled into a
LinearProgram through ProgramBuilder and solved here.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from utils.errors import ArgumentError, SolverError

logger = logging.getLogger(__name__)

Bound = Tuple[Optional[float], Optional[float]]


class LpStatus(str, Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'


def _matrix(values, columns: int, name: str) -> np.ndarray:
    if values is None:
        return np.zeros((0, columns))
    matrix = np.atleast_2d(np.asarray(values, dtype=float))
    if matrix.size == 0:
        return np.zeros((0, columns))
    if matrix.shape[1] != columns:
        raise ArgumentError(f'{name} has {matrix.shape[1]} columns, expected {columns}')
    return matrix


def _vector(values, length: int, name: str) -> np.ndarray:
    if values is None:
        values = np.zeros(length)
    vector = np.atleast_1d(np.asarray(values, dtype=float)).ravel()
    if vector.shape[0] != length:
        raise ArgumentError(f'{name} has length {vector.shape[0]}, expected {length}')
    return vector


@dataclass
class LinearProgram:
    """
    minimize c·x subject to A_ub·x ≤ b_ub, A_eq·x = b_eq, lower ≤ x ≤ upper

    Bounds default to free variables; ``None`` or an infinite value means
    unbounded on that side.
    """

    c: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    bounds: Optional[Sequence[Bound]] = None

    def __post_init__(self):
        self.c = np.atleast_1d(np.asarray(self.c, dtype=float)).ravel()
        n = self.c.shape[0]
        if n == 0:
            raise ArgumentError('linear program without variables')
        self.A_ub = _matrix(self.A_ub, n, 'A_ub')
        self.b_ub = _vector(self.b_ub, self.A_ub.shape[0], 'b_ub')
        self.A_eq = _matrix(self.A_eq, n, 'A_eq')
        self.b_eq = _vector(self.b_eq, self.A_eq.shape[0], 'b_eq')

        if self.bounds is None:
            self.bounds = [(None, None)] * n
        if len(self.bounds) != n:
            raise ArgumentError(f'{len(self.bounds)} bounds for {n} variables')
        cleaned = []
        for lower, upper in self.bounds:
            lower = None if lower is None or np.isneginf(lower) else float(lower)
            upper = None if upper is None or np.isposinf(upper) else float(upper)
            if lower is not None and upper is not None and lower > upper:
                raise ArgumentError(f'empty bound interval [{lower}, {upper}]')
            cleaned.append((lower, upper))
        self.bounds = cleaned

        for name in ('c', 'A_ub', 'b_ub', 'A_eq', 'b_eq'):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ArgumentError(f'{name} has non-finite coefficients')

    @property
    def n_variables(self) -> int:
        return self.c.shape[0]

    def residual(self, x: np.ndarray) -> float:
        """Largest violation of any constraint or bound at x."""
        worst = 0.0
        if self.A_ub.shape[0]:
            worst = max(worst, float(np.max(self.A_ub @ x - self.b_ub)))
        if self.A_eq.shape[0]:
            worst = max(worst, float(np.max(np.abs(self.A_eq @ x - self.b_eq))))
        for value, (lower, upper) in zip(x, self.bounds):
            if lower is not None:
                worst = max(worst, lower - value)
            if upper is not None:
                worst = max(worst, value - upper)
        return worst


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: Optional[np.ndarray]
    objective: Optional[float]
    residual: float
    iterations: int
    dual_gap: Optional[float] = None

    @property
    def ok(self) -> bool:
        return self.status is LpStatus.OPTIMAL


# ==================== STANDARD FORM ====================

@dataclass
class _StandardForm:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    # x = offset + lift @ y[:lift.shape[1]]
    lift: np.ndarray
    offset: np.ndarray


def _standard_form(lp: LinearProgram) -> _StandardForm:
    n = lp.n_variables
    columns = []
    offset = np.zeros(n)
    upper_rows = []

    for j, (lower, upper) in enumerate(lp.bounds):
        unit = np.zeros(n)
        unit[j] = 1.0
        if lower is not None:
            offset[j] = lower
            columns.append(unit)
            if upper is not None:
                upper_rows.append((len(columns) - 1, upper - lower))
        elif upper is not None:
            offset[j] = upper
            columns.append(-unit)
        else:
            columns.append(unit)
            columns.append(-unit)

    lift = np.column_stack(columns)
    n_lifted = lift.shape[1]

    A_ub = lp.A_ub @ lift
    b_ub = lp.b_ub - lp.A_ub @ offset
    if upper_rows:
        extra = np.zeros((len(upper_rows), n_lifted))
        for row, (column, width) in enumerate(upper_rows):
            extra[row, column] = 1.0
        A_ub = np.vstack([A_ub, extra])
        b_ub = np.concatenate([b_ub, [width for _, width in upper_rows]])

    A_eq = lp.A_eq @ lift
    b_eq = lp.b_eq - lp.A_eq @ offset

    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    A = np.zeros((m_ub + m_eq, n_lifted + m_ub))
    A[:m_ub, :n_lifted] = A_ub
    A[:m_ub, n_lifted:] = np.eye(m_ub)
    A[m_ub:, :n_lifted] = A_eq
    b = np.concatenate([b_ub, b_eq])
    c = np.concatenate([lp.c @ lift, np.zeros(m_ub)])

    negative = b < 0
    A[negative] *= -1.0
    b[negative] *= -1.0
    return _StandardForm(A=A, b=b, c=c, lift=lift, offset=offset)


# ==================== TABLEAU ====================

def _pivot(T: np.ndarray, basis: List[int], row: int, col: int):
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    basis[row] = col


def _simplex(T: np.ndarray, basis: List[int], m: int, n_columns: int,
             tol: float, budget: int) -> Tuple[LpStatus, int]:
    """
    Minimize the objective stored in the last row of T with Bland's rule

    :return: (status, iterations used)
    """
    for iteration in range(budget):
        reduced = T[-1, :n_columns]
        candidates = np.flatnonzero(reduced < -tol)
        if candidates.size == 0:
            return LpStatus.OPTIMAL, iteration
        col = int(candidates[0])

        column = T[:m, col]
        positive = column > tol
        if not positive.any():
            return LpStatus.UNBOUNDED, iteration

        ratios = np.full(m, np.inf)
        ratios[positive] = T[:m, -1][positive] / column[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol * max(1.0, abs(best)))
        row = int(ties[np.argmin([basis[i] for i in ties])])

        _pivot(T, basis, row, col)
        # clip round-off below zero on the right-hand side
        rhs = T[:m, -1]
        rhs[(rhs < 0) & (rhs > -tol)] = 0.0

    raise SolverError('simplex iteration limit reached', limit=budget)


def solve(lp: LinearProgram, tol: Optional[float] = None, certify: bool = False) -> LpSolution:
    """
    Solve a linear program

    :param lp: the program
    :param tol: pivoting and feasibility tolerance (Config.TOL_LP by default)
    :param certify: also compute the dual bound and report the duality gap
    :return: LpSolution; x and objective are None unless optimal
    """
    tol = Config.TOL_LP if tol is None else tol
    if lp.n_variables > Config.LP_MAX_VARIABLES:
        raise SolverError(
            f'{lp.n_variables} variables exceed the cap of {Config.LP_MAX_VARIABLES}',
            variables=lp.n_variables,
        )

    std = _standard_form(lp)
    m, n_std = std.A.shape
    budget = Config.LP_MAX_ITERATIONS

    # Phase 1: one artificial per row, minimize their sum
    T = np.zeros((m + 2, n_std + m + 1))
    T[:m, :n_std] = std.A
    T[:m, n_std:n_std + m] = np.eye(m)
    T[:m, -1] = std.b
    T[m, :n_std] = std.c
    T[m + 1, :n_std] = -std.A.sum(axis=0)
    T[m + 1, -1] = -std.b.sum()
    basis = list(range(n_std, n_std + m))

    status, used = _simplex(T, basis, m, n_std + m, tol, budget)
    iterations = used
    scale = 1.0 + (float(np.abs(std.b).max()) if m else 0.0)
    if -T[-1, -1] > tol * scale:
        logger.debug('LP infeasible after phase 1 (artificial sum %.3e)', -T[-1, -1])
        return LpSolution(LpStatus.INFEASIBLE, None, None, float('inf'), iterations)

    # Drive remaining artificials out of the basis; rows that cannot pivot are redundant
    redundant = []
    for row in range(m):
        if basis[row] < n_std:
            continue
        candidates = np.flatnonzero(np.abs(T[row, :n_std]) > tol)
        if candidates.size:
            _pivot(T, basis, row, int(candidates[0]))
        else:
            redundant.append(row)

    keep = [row for row in range(m) if row not in redundant]
    A_kept = std.A[keep]
    b_kept = std.b[keep]
    basis = [basis[row] for row in keep]
    T = np.vstack([T[keep], T[m:m + 1]])
    T = np.hstack([T[:, :n_std], T[:, -1:]])
    m = len(keep)

    # Phase 2
    status, used = _simplex(T, basis, m, n_std, tol, budget - iterations)
    iterations += used
    if status is LpStatus.UNBOUNDED:
        logger.debug('LP unbounded after %d iterations', iterations)
        return LpSolution(LpStatus.UNBOUNDED, None, None, float('inf'), iterations)

    y = np.zeros(n_std)
    y[basis] = T[:m, -1]
    n_lifted = std.lift.shape[1]
    x = std.offset + std.lift @ y[:n_lifted]
    objective = float(lp.c @ x)
    residual = lp.residual(x)

    dual_gap = None
    if certify:
        dual_gap = _dual_gap(A_kept, b_kept, std.c, basis, y)

    logger.debug('LP solved: %d vars, %d rows, %d iterations, objective %.12g, residual %.2e',
                 lp.n_variables, m, iterations, objective, residual)
    return LpSolution(LpStatus.OPTIMAL, x, objective, residual, iterations, dual_gap)


def _dual_gap(A: np.ndarray, b: np.ndarray, c: np.ndarray, basis: List[int], y: np.ndarray) -> float:
    if not basis:
        return abs(float(c @ y))
    B = A[:, basis]
    try:
        duals = np.linalg.solve(B.T, c[basis])
    except np.linalg.LinAlgError as exc:
        raise SolverError('numerically singular basis', basis=list(basis)) from exc
    return abs(float(c @ y) - float(b @ duals))


# ==================== PROGRAM BUILDER ====================

Term = Tuple[slice, object]


def coefficient_block(coef, rows: int, width: int) -> np.ndarray:
    coef = np.asarray(coef, dtype=float)
    if coef.ndim == 0:
        if rows != width:
            raise ArgumentError(f'scalar coefficient needs a square block, got {rows}x{width}')
        return coef * np.eye(width)
    if coef.ndim == 1:
        if rows == 1 and coef.shape[0] == width:
            return coef.reshape(1, width)
        if width == 1 and coef.shape[0] == rows:
            return coef.reshape(rows, 1)
    if coef.shape != (rows, width):
        raise ArgumentError(f'coefficient block {coef.shape} does not fit {rows}x{width}')
    return coef


@dataclass
class ProgramBuilder:
    """
    Incremental construction of a LinearProgram from variable blocks

    A term is ``(block, coefficient)`` where the coefficient is a scalar
    (multiple of the identity), a vector (one row, or one column) or a matrix.
    """

    _bounds: List[Bound] = field(default_factory=list)
    _ub: list = field(default_factory=list)
    _eq: list = field(default_factory=list)
    _objective: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self._bounds)

    def variables(self, size: int, lower: Optional[float] = None, upper: Optional[float] = None) -> slice:
        start = len(self._bounds)
        self._bounds.extend([(lower, upper)] * size)
        return slice(start, start + size)

    def add_le(self, terms: Sequence[Term], rhs):
        self._ub.append((list(terms), np.atleast_1d(np.asarray(rhs, dtype=float))))

    def add_eq(self, terms: Sequence[Term], rhs):
        self._eq.append((list(terms), np.atleast_1d(np.asarray(rhs, dtype=float))))

    def minimize(self, terms: Sequence[Term]):
        self._objective.extend(terms)

    def _rows(self, constraints) -> Tuple[np.ndarray, np.ndarray]:
        n = self.size
        blocks, rhs_parts = [], []
        for terms, rhs in constraints:
            block = np.zeros((rhs.shape[0], n))
            for target, coef in terms:
                width = target.stop - target.start
                block[:, target] += coefficient_block(coef, rhs.shape[0], width)
            blocks.append(block)
            rhs_parts.append(rhs)
        if not blocks:
            return np.zeros((0, n)), np.zeros(0)
        return np.vstack(blocks), np.concatenate(rhs_parts)

    def build(self) -> LinearProgram:
        c = np.zeros(self.size)
        for target, coef in self._objective:
            width = target.stop - target.start
            c[target] += coefficient_block(coef, 1, width).ravel() if np.ndim(coef) else coef
        A_ub, b_ub = self._rows(self._ub)
        A_eq, b_eq = self._rows(self._eq)
        return LinearProgram(c=c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=list(self._bounds))

    def solve(self, tol: Optional[float] = None) -> LpSolution:
        return solve(self.build(), tol=tol)
