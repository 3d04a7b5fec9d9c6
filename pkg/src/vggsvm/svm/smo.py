"""Sequential minimal optimization for the soft-margin SVM dual.

Maximizes  W(a) = sum(a) - 1/2 * sum_ij a_i a_j y_i y_j K_ij  subject to
0 <= a_i <= C and sum(a_i y_i) = 0, by repeatedly solving the two-variable
subproblem in closed form (Platt's method).  The working pair is the first
KKT violator of the sweep joined with the point of largest error gap
|E1 - E2|, falling back to a deterministic scan when that pair cannot move.

The solver keeps the decision cache g_i = sum_j a_j y_j K_ij and a running
bias, and terminates when a full sweep finds no KKT violation beyond the
tolerance, when ``max_passes`` consecutive sweeps accept no update, or when
the ``max_iter`` update guard trips (reported as non-convergence).
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

__all__ = ["SmoResult", "solve_dual", "dual_objective", "kkt_violations"]

_STEP_EPS = 1e-12


@dataclass
class SmoResult:
    alpha: np.ndarray
    bias: float
    iterations: int
    sweeps: int
    converged: bool


def dual_objective(K, y: np.ndarray, alpha: np.ndarray) -> float:
    """Dual objective value; accepts a dense Gram matrix only."""
    u = alpha * y
    return float(alpha.sum() - 0.5 * (u @ (np.asarray(K) @ u)))


def kkt_violations(K, y: np.ndarray, alpha: np.ndarray, bias: float, C: float, tol: float) -> np.ndarray:
    """Per-sample KKT violation magnitudes (0 where satisfied at tolerance)."""
    f = (alpha * y) @ np.asarray(K) + bias
    margin = y * f
    viol = np.zeros_like(margin)
    at_lower = alpha <= 0
    at_upper = alpha >= C
    free = ~at_lower & ~at_upper
    viol[at_lower] = np.maximum(0.0, (1.0 - tol) - margin[at_lower])
    viol[free] = np.maximum(0.0, np.abs(margin[free] - 1.0) - tol)
    viol[at_upper] = np.maximum(0.0, margin[at_upper] - (1.0 + tol))
    return viol


class _RowProvider:
    """Kernel row access with an LRU cache, for data too large to keep a
    dense Gram matrix around."""

    def __init__(self, row_fn, n: int, max_rows: int = 1024):
        self._row_fn = row_fn
        self.n = n
        self._cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self._max_rows = max_rows
        self.diag = np.array([row_fn(i)[i] for i in range(n)], dtype=np.float64)

    def row(self, i: int) -> np.ndarray:
        cached = self._cache.get(i)
        if cached is not None:
            self._cache.move_to_end(i)
            return cached
        r = np.asarray(self._row_fn(i), dtype=np.float64)
        self._cache[i] = r
        if len(self._cache) > self._max_rows:
            self._cache.popitem(last=False)
        return r


class _DenseProvider:
    def __init__(self, K: np.ndarray):
        self.K = np.asarray(K, dtype=np.float64)
        self.n = self.K.shape[0]
        self.diag = np.ascontiguousarray(np.diag(self.K))

    def row(self, i: int) -> np.ndarray:
        return self.K[i]


class _Solver:
    def __init__(self, provider, y, C, tol, max_passes, max_iter, on_step):
        self.kp = provider
        self.y = y
        self.C = C
        self.tol = tol
        self.max_passes = max_passes
        self.max_iter = max_iter
        self.on_step = on_step
        n = provider.n
        self.alpha = np.zeros(n, dtype=np.float64)
        self.b = 0.0
        self.g = np.zeros(n, dtype=np.float64)  # f without bias
        self.updates = 0

    # -- two-variable subproblem ------------------------------------------

    def _objective_delta(self, i1, i2, d1, d2, k11, k22, k12) -> float:
        y = self.y
        s = y[i1] * y[i2]
        linear = d1 + d2 - (y[i1] * d1 * self.g[i1] + y[i2] * d2 * self.g[i2])
        quad = 0.5 * (d1 * d1 * k11 + d2 * d2 * k22) + s * d1 * d2 * k12
        return linear - quad

    def _take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        y, alpha, C = self.y, self.alpha, self.C
        a1o, a2o = alpha[i1], alpha[i2]
        y1, y2 = y[i1], y[i2]
        s = y1 * y2

        if s < 0:
            L = max(0.0, a2o - a1o)
            H = min(C, C + a2o - a1o)
        else:
            L = max(0.0, a1o + a2o - C)
            H = min(C, a1o + a2o)
        if L >= H:
            return False

        row1 = self.kp.row(i1)
        row2 = self.kp.row(i2)
        k11, k22, k12 = row1[i1], row2[i2], row1[i2]
        E1 = self.g[i1] + self.b - y1
        E2 = self.g[i2] + self.b - y2

        eta = k11 + k22 - 2.0 * k12
        if eta > 0.0:
            a2 = a2o + y2 * (E1 - E2) / eta
            a2 = min(max(a2, L), H)
        else:
            # Zero/negative curvature along the constraint line: the dual is
            # linear or convex there, so the maximum sits at an endpoint.
            dL = self._objective_delta(i1, i2, s * (a2o - L), L - a2o, k11, k22, k12)
            dH = self._objective_delta(i1, i2, s * (a2o - H), H - a2o, k11, k22, k12)
            if dL > dH + _STEP_EPS:
                a2 = L
            elif dH > dL + _STEP_EPS:
                a2 = H
            else:
                return False

        if abs(a2 - a2o) < _STEP_EPS * (a2 + a2o + _STEP_EPS):
            return False
        a1 = a1o + s * (a2o - a2)
        a1 = min(max(a1, 0.0), C)  # sweep up float residue

        d1 = a1 - a1o
        d2 = a2 - a2o
        b1 = self.b - E1 - y1 * d1 * k11 - y2 * d2 * k12
        b2 = self.b - E2 - y1 * d1 * k12 - y2 * d2 * k22
        if 0.0 < a1 < C:
            b_new = b1
        elif 0.0 < a2 < C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)

        alpha[i1] = a1
        alpha[i2] = a2
        self.g += (y1 * d1) * row1 + (y2 * d2) * row2
        self.b = b_new
        self.updates += 1
        if self.on_step is not None:
            self.on_step(alpha, b_new)
        return True

    # -- working-pair selection -------------------------------------------

    def _violates(self, i: int) -> bool:
        E = self.g[i] + self.b - self.y[i]
        r = E * self.y[i]
        return (r < -self.tol and self.alpha[i] < self.C) or (r > self.tol and self.alpha[i] > 0.0)

    def _examine(self, i2: int) -> bool:
        if not self._violates(i2):
            return False
        n = self.kp.n
        E2 = self.g[i2] + self.b - self.y[i2]
        nb = np.flatnonzero((self.alpha > 0.0) & (self.alpha < self.C))

        if nb.size > 1:
            E_nb = self.g[nb] + self.b - self.y[nb]
            i1 = int(nb[np.argmax(np.abs(E_nb - E2))])
            if self._take_step(i1, i2):
                return True
        start = (i2 + 1) % n
        for k in range(nb.size):
            i1 = int(nb[(k + start) % nb.size])
            if self._take_step(i1, i2):
                return True
        for k in range(n):
            i1 = (k + start) % n
            if self._take_step(i1, i2):
                return True
        return False

    # -- main loop ----------------------------------------------------------

    def run(self) -> SmoResult:
        n = self.kp.n
        stalled_sweeps = 0
        sweeps = 0
        clean = False
        while stalled_sweeps < self.max_passes:
            sweeps += 1
            changed = 0
            violations = 0
            for i2 in range(n):
                if self._violates(i2):
                    violations += 1
                    if self._examine(i2):
                        changed += 1
                if self.updates >= self.max_iter:
                    self._finalize_bias()
                    return SmoResult(self.alpha, self.b, self.updates, sweeps, False)
            if violations == 0:
                clean = True
                break
            stalled_sweeps = stalled_sweeps + 1 if changed == 0 else 0

        self._finalize_bias()
        return SmoResult(self.alpha, self.b, self.updates, sweeps, clean)

    def _finalize_bias(self) -> None:
        """Choose the bias that best centers the KKT conditions.

        With free support vectors the exact-margin equations give a direct
        estimate; otherwise the bound constraints define a feasible interval
        the running bias is clamped into.  The candidate that minimizes the
        worst violation wins, so finalization can only improve on the running
        value.
        """
        alpha, y, g, C = self.alpha, self.y, self.g, self.C
        at_lower = alpha <= 0.0
        at_upper = alpha >= C
        free = ~at_lower & ~at_upper

        candidates = [self.b]
        if np.any(free):
            candidates.append(float(np.mean(y[free] - g[free])))
        else:
            lowers, uppers = [-np.inf], [np.inf]
            for i in np.flatnonzero(at_lower):
                (lowers if y[i] > 0 else uppers).append(y[i] - g[i])
            for i in np.flatnonzero(at_upper):
                (uppers if y[i] > 0 else lowers).append(y[i] - g[i])
            lo, hi = max(lowers), min(uppers)
            if lo <= hi:
                candidates.append(min(max(self.b, lo), hi))

        def worst(b):
            margin = y * (g + b)
            v = 0.0
            if np.any(at_lower):
                v = max(v, float(np.max(1.0 - margin[at_lower], initial=0.0)))
            if np.any(free):
                v = max(v, float(np.max(np.abs(margin[free] - 1.0), initial=0.0)))
            if np.any(at_upper):
                v = max(v, float(np.max(margin[at_upper] - 1.0, initial=0.0)))
            return v

        self.b = min(candidates, key=worst)


def solve_dual(
    K,
    y: np.ndarray,
    C: float,
    *,
    tol: float = 1e-3,
    max_passes: int = 10,
    max_iter: int = 100_000,
    on_step=None,
    n: int | None = None,
) -> SmoResult:
    """Solve the dual; ``K`` is a dense Gram matrix or a row callable.

    When ``K`` is a callable it must map an index i to row K[i] and ``n``
    must give the problem size.
    """
    y = np.asarray(y, dtype=np.float64)
    if callable(K):
        if n is None:
            raise ValueError("n is required when K is a row callable")
        provider = _RowProvider(K, n)
    else:
        provider = _DenseProvider(K)
    if y.shape != (provider.n,):
        raise ValueError(f"y has shape {y.shape}, expected ({provider.n},)")
    if not (np.isfinite(C) and C > 0):
        raise ValueError(f"C must be finite and positive, got {C}")
    if not (set(np.unique(y)) <= {-1.0, 1.0}):
        raise ValueError("labels must be -1/+1")
    if np.all(y == y[0]):
        raise ValueError("training data contains a single class")

    solver = _Solver(provider, y, float(C), float(tol), int(max_passes), int(max_iter), on_step)
    return solver.run()
