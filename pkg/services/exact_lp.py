"""Exact rational linear programming: a dictionary-form simplex over Fractions"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

logger = logging.getLogger(__name__)

# Auxiliary variable of the phase-one problem; sorts before every real variable
_AUX = -1


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Optional[Fraction] = None
    x: Optional[List[Fraction]] = None
    pivots: int = 0


class FractionTableau:
    """Maximise c.x subject to A x <= b, x >= 0, exactly.

    Row i of the dictionary reads x_B[i] + sum_j A[i][j] x_N[j] = b[i] and the
    objective is z = z0 + sum_j c[j] x_N[j]. Entering and leaving variables
    follow Bland's rule, so degenerate problems terminate. Phase one adds a
    single auxiliary column when some b[i] is negative.
    """

    def __init__(self, A: Sequence[Sequence], b: Sequence, c: Sequence):
        self.m = len(A)
        self.n = len(c)
        if len(b) != self.m or any(len(row) != self.n for row in A):
            raise ValueError("constraint shapes do not match")
        self.A = [[Fraction(v) for v in row] for row in A]
        self.b = [Fraction(v) for v in b]
        self.objective = [Fraction(v) for v in c]
        self.c = list(self.objective)
        self.z = Fraction(0)
        self.nb_vars = list(range(self.n))
        self.b_vars = list(range(self.n, self.n + self.m))
        self.pivots = 0

    def pivot(self, i: int, j: int):
        piv = self.A[i][j]
        row = [v / piv for v in self.A[i]]
        row[j] = 1 / piv
        self.b[i] /= piv
        self.A[i] = row
        for k in range(self.m):
            if k == i:
                continue
            f = self.A[k][j]
            if f == 0:
                continue
            current = self.A[k]
            for l in range(len(row)):
                current[l] = -f * row[j] if l == j else current[l] - f * row[l]
            self.b[k] -= f * self.b[i]
        cj = self.c[j]
        if cj != 0:
            for l in range(len(row)):
                self.c[l] = -cj * row[j] if l == j else self.c[l] - cj * row[l]
            self.z += cj * self.b[i]
        self.nb_vars[j], self.b_vars[i] = self.b_vars[i], self.nb_vars[j]
        self.pivots += 1

    def _bland_step(self) -> str:
        candidates = [(self.nb_vars[j], j) for j in range(len(self.c)) if self.c[j] > 0]
        if not candidates:
            return "optimal"
        _, j = min(candidates)
        rows = [
            (self.b[i] / self.A[i][j], self.b_vars[i], i)
            for i in range(self.m)
            if self.A[i][j] > 0
        ]
        if not rows:
            return "unbounded"
        _, _, i = min(rows)
        self.pivot(i, j)
        return "go_on"

    def _run(self) -> str:
        while True:
            state = self._bland_step()
            if state != "go_on":
                return state

    def _phase_one(self) -> bool:
        """Drive the dictionary to a feasible basis; False when none exists"""
        worst = min(range(self.m), key=lambda i: (self.b[i], i))
        if self.b[worst] >= 0:
            return True
        for row in self.A:
            row.append(Fraction(-1))
        self.nb_vars.append(_AUX)
        self.c = [Fraction(0)] * self.n + [Fraction(-1)]
        self.z = Fraction(0)
        self.pivot(worst, self.n)
        self._run()
        if self.z < 0:
            return False
        if _AUX in self.b_vars:
            # degenerate: the auxiliary variable sits in the basis at level 0
            i = self.b_vars.index(_AUX)
            j = next((j for j in range(len(self.nb_vars)) if self.A[i][j] != 0), None)
            if j is None:
                # redundant row
                del self.A[i], self.b[i], self.b_vars[i]
                self.m -= 1
            else:
                self.pivot(i, j)
        col = self.nb_vars.index(_AUX)
        for row in self.A:
            del row[col]
        del self.nb_vars[col]
        self._restore_objective()
        return True

    def _restore_objective(self):
        self.c = [Fraction(0)] * self.n
        self.z = Fraction(0)
        for j, var in enumerate(self.nb_vars):
            if var < self.n:
                self.c[j] += self.objective[var]
        for i, var in enumerate(self.b_vars):
            if var < self.n and self.objective[var] != 0:
                weight = self.objective[var]
                self.z += weight * self.b[i]
                for j in range(self.n):
                    self.c[j] -= weight * self.A[i][j]

    def solve(self) -> LPResult:
        if self.m and not self._phase_one():
            return LPResult(status="infeasible", pivots=self.pivots)
        state = self._run()
        logger.debug("exact simplex finished (%s) after %d pivots", state, self.pivots)
        if state == "unbounded":
            return LPResult(status="unbounded", pivots=self.pivots)
        x = [Fraction(0)] * self.n
        for i, var in enumerate(self.b_vars):
            if var < self.n:
                x[var] = self.b[i]
        return LPResult(status="optimal", value=self.z, x=x, pivots=self.pivots)


def maximize(A, b, c) -> LPResult:
    return FractionTableau(A, b, c).solve()


def fraction_rank(rows: Sequence[Sequence]) -> int:
    """Rank of a rational matrix by exact Gaussian elimination"""
    matrix = [[Fraction(v) for v in row] for row in rows]
    if not matrix:
        return 0
    rank = 0
    cols = len(matrix[0])
    for col in range(cols):
        pivot = next((r for r in range(rank, len(matrix)) if matrix[r][col] != 0), None)
        if pivot is None:
            continue
        matrix[rank], matrix[pivot] = matrix[pivot], matrix[rank]
        lead = matrix[rank][col]
        for r in range(rank + 1, len(matrix)):
            factor = matrix[r][col] / lead
            if factor != 0:
                matrix[r] = [a - factor * p for a, p in zip(matrix[r], matrix[rank])]
        rank += 1
        if rank == len(matrix):
            break
    return rank
