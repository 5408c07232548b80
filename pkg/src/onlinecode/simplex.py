"""Exact simplex solvers for weighted least-absolute-deviation problems.

Two solvers live here.  :func:`solve` is a dense two-phase tableau simplex
for standard-form problems::

    minimize    c @ x
    subject to  A @ x == b,  x >= 0

and :func:`lad_solve_dense` applies it to the LAD reformulation.  It is kept
as a reference for small instances.

:func:`lad_solve` is the decoder's workhorse.  It is a revised primal
simplex specialised to ``min sum_i w_i |z_i - (A x)_i|`` whose basis is the
pair (rows fitted exactly, free ``x`` columns).  Its ratio test passes over
residual sign changes in one step (long-step LAD pivoting), it prices with
Dantzig's rule and switches to Bland's rule after a run of degenerate
pivots, and it breaks the heavy degeneracy of LAD vertices by perturbing
the right-hand side before a cleanup pass on the true data.  Both return an
optimal vertex; sizes are desk scale (a few thousand rows).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-10
OPT_TOL = 1e-9
MAX_PIVOTS = 100_000


class SimplexError(RuntimeError):
    """Internal failure (infeasible or unbounded where that is impossible)."""


class IterationLimitError(SimplexError):
    """Pivot cap reached; ``x`` holds the last basic feasible point."""

    def __init__(self, message, x=None, pivots=0):
        super().__init__(message)
        self.x = x
        self.pivots = pivots


@dataclass
class SimplexResult:
    x: np.ndarray
    objective: float
    basis: np.ndarray
    phase1_pivots: int
    phase2_pivots: int

    @property
    def pivots(self) -> int:
        return self.phase1_pivots + self.phase2_pivots


def _bland_enter(reduced, tol):
    neg = np.flatnonzero(reduced < -tol)
    return int(neg[0]) if neg.size else -1


def _dantzig_enter(reduced, tol):
    q = int(np.argmin(reduced))
    return q if reduced[q] < -tol else -1


class _Pricing:
    """Entering-variable rule.

    ``"bland"`` always takes the lowest eligible index.  ``"hybrid"`` takes
    the most negative reduced cost but switches to Bland's rule after
    ``stall`` consecutive degenerate pivots and stays there until a pivot
    makes strict progress, so cycling cannot occur.
    """

    def __init__(self, rule="hybrid", stall=20):
        if rule not in ("bland", "hybrid"):
            raise ValueError(f"unknown pricing rule {rule!r}")
        self.rule = rule
        self.stall = stall
        self.degenerate = 0

    def enter(self, reduced, tol):
        if self.rule == "bland" or self.degenerate >= self.stall:
            return _bland_enter(reduced, tol)
        return _dantzig_enter(reduced, tol)

    def record(self, step):
        self.degenerate = self.degenerate + 1 if step <= 0.0 else 0


def _bland_leave(tab, col, basis, pivot_tol):
    column = tab[:-1, col]
    rows = np.flatnonzero(column > pivot_tol)
    if rows.size == 0:
        return -1
    ratios = tab[rows, -1] / column[rows]
    best = ratios.min()
    # ties within tolerance go to the smallest basic variable index
    tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
    return int(tied[np.argmin(basis[tied])])


def _pivot(tab, row, col):
    tab[row] /= tab[row, col]
    factor = tab[:, col].copy()
    factor[row] = 0.0
    tab -= np.outer(factor, tab[row])
    tab[:, col] = 0.0
    tab[row, col] = 1.0


def _run(tab, basis, allowed, max_pivots, pivot_tol, opt_tol, used, pricing):
    """Iterate pivots on ``tab`` (objective in the last row) until optimal."""
    pivots = 0
    while True:
        reduced = np.where(allowed, tab[-1, :-1], 0.0)
        col = pricing.enter(reduced, opt_tol)
        if col < 0:
            return pivots
        row = _bland_leave(tab, col, basis, pivot_tol)
        if row < 0:
            raise SimplexError("LP is unbounded")
        if used + pivots >= max_pivots:
            raise IterationLimitError(
                f"pivot cap {max_pivots} reached", pivots=used + pivots)
        pricing.record(tab[row, -1])
        _pivot(tab, row, col)
        basis[row] = col
        pivots += 1


def _initial_basis(A):
    """Pick unit columns (one +1 entry, zeros elsewhere) as a crash basis."""
    m, n = A.shape
    basis = np.full(m, -1, dtype=np.intp)
    nonzero = A != 0.0
    counts = nonzero.sum(axis=0)
    for j in np.flatnonzero(counts == 1):
        i = int(np.flatnonzero(nonzero[:, j])[0])
        if basis[i] < 0 and A[i, j] == 1.0:
            basis[i] = j
    return basis


def solve(c, A, b, max_pivots=MAX_PIVOTS, pivot_tol=PIVOT_TOL, opt_tol=OPT_TOL,
          rule="hybrid"):
    """Solve ``min c@x s.t. A@x == b, x >= 0`` and return a :class:`SimplexResult`.

    Phase one adds artificial variables only for rows that lack a unit
    column.  The returned point is recomputed from the final basis with a
    direct solve to strip accumulated tableau round-off.
    """
    c = np.asarray(c, dtype=float)
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("dimension mismatch between c, A and b")

    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    basis = _initial_basis(A)
    missing = np.flatnonzero(basis < 0)
    n_art = missing.size
    width = n + n_art
    tab = np.zeros((m + 1, width + 1))
    tab[:m, :n] = A
    tab[:m, -1] = b
    for r, i in enumerate(missing):
        tab[i, n + r] = 1.0
        basis[i] = n + r

    pricing = _Pricing(rule)
    phase1 = 0
    if n_art:
        tab[-1, n:width] = 1.0
        for i in missing:
            tab[-1] -= tab[i]
        allowed = np.ones(width, dtype=bool)
        phase1 = _run(tab, basis, allowed, max_pivots, pivot_tol, opt_tol, 0,
                      pricing)
        if -tab[-1, -1] > 1e-7 * max(1.0, np.abs(b).max()):
            raise SimplexError("LP is infeasible")
        # drive remaining (zero-valued) artificials out of the basis
        for row in np.flatnonzero(basis >= n):
            cand = np.flatnonzero(np.abs(tab[row, :n]) > pivot_tol)
            if cand.size:
                _pivot(tab, row, int(cand[0]))
                basis[row] = int(cand[0])
        tab[:, n:width] = 0.0

    # phase two objective row in terms of the current basis
    tab[-1] = 0.0
    tab[-1, :n] = c
    for row, j in enumerate(basis):
        if j < n and c[j] != 0.0:
            tab[-1] -= c[j] * tab[row]
    allowed = np.zeros(width, dtype=bool)
    allowed[:n] = True
    try:
        phase2 = _run(tab, basis, allowed, max_pivots, pivot_tol, opt_tol,
                      phase1, pricing)
    except IterationLimitError as err:
        err.x = _basic_point(tab, basis, n)
        raise

    x = _refine(A, b, basis, n, _basic_point(tab, basis, n))
    return SimplexResult(x=x, objective=float(c @ x), basis=basis.copy(),
                         phase1_pivots=phase1, phase2_pivots=phase2)


def _basic_point(tab, basis, n):
    x = np.zeros(n)
    real = basis < n
    x[basis[real]] = tab[np.flatnonzero(real), -1]
    return x


def _refine(A, b, basis, n, fallback):
    """Re-solve the basic system directly; keep the tableau point if singular."""
    real = basis < n
    cols = basis[real]
    rows = np.flatnonzero(real)
    if cols.size == 0:
        return fallback
    B = A[np.ix_(rows, cols)]
    if cols.size == A.shape[0]:
        try:
            xb = np.linalg.solve(B, b)
        except np.linalg.LinAlgError:
            return fallback
    else:
        xb, *_ = np.linalg.lstsq(A[:, cols], b, rcond=None)
    if not np.all(np.isfinite(xb)) or np.any(xb < -1e-7):
        return fallback
    x = np.zeros(n)
    x[cols] = np.maximum(xb, 0.0)
    return x


def lad_solve_dense(weights, A, z, max_pivots=MAX_PIVOTS, rule="hybrid"):
    """Weighted LAD through the generic tableau solver (small problems only).

    Realized in standard form with ``x = xp - xn`` and ``z - A x = u - v``.
    Returns ``(x, objective, result)``.
    """
    w, A, z = _check_lad(weights, A, z)
    m, n = A.shape
    eye = np.eye(m)
    std_A = np.hstack([A, -A, eye, -eye])
    cost = np.concatenate([np.zeros(2 * n), w, w])
    res = solve(cost, std_A, z, max_pivots=max_pivots, rule=rule)
    x = res.x[:n] - res.x[n:2 * n]
    objective = float(w @ np.abs(z - A @ x))
    return x, objective, res


def _check_lad(weights, A, z):
    w = np.asarray(weights, dtype=float)
    A = np.asarray(A, dtype=float)
    z = np.asarray(z, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be two-dimensional")
    m = A.shape[0]
    if w.shape != (m,) or z.shape != (m,):
        raise ValueError("weights and z must have one entry per row of A")
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(z))):
        raise ValueError("A and z must be finite")
    return w, A, z


@dataclass
class LadResult:
    x: np.ndarray
    objective: float
    pivots: int
    breakpoints: int
    interpolated_rows: np.ndarray
    basic_columns: np.ndarray


def lad_solve(weights, A, z, max_pivots=MAX_PIVOTS, pivot_tol=PIVOT_TOL,
              opt_tol=OPT_TOL, rule="hybrid", perturb=1e-9):
    """Weighted least absolute deviations ``min_x sum(w * |z - A @ x|)``.

    Revised primal simplex on the same standard form as
    :func:`lad_solve_dense` (variables ordered ``xp, xn, u, v``).  A basis is
    stored compactly as the set ``I`` of rows with zero residual and the set
    ``J`` of basic columns of ``x`` (``|I| == |J|``); every other row has
    exactly one of ``u_i``/``v_i`` basic.  The start ``u_i`` or ``v_i`` per
    the sign of ``z_i`` is feasible, so phase one is empty.

    The ratio test is the long-step one for piecewise-linear objectives: a
    step moves through residual sign changes (each an exchange of ``u_i``
    and ``v_i``) while the directional derivative stays negative, and stops
    at the breakpoint where it turns non-negative.  ``x`` is free and never
    blocks.  ``rule`` selects the pricing (see :class:`_Pricing`).

    Decoding problems are highly degenerate (most residuals vanish at the
    optimum).  With ``perturb > 0`` the right-hand side is first shifted by
    a fixed pseudo-random vector of relative size ``perturb``; the basis
    found there is re-evaluated on the true ``z`` and the simplex resumes
    from it, which usually needs no further pivots.
    """
    w, A, z = _check_lad(weights, A, z)
    m, n = A.shape
    state = np.where(z >= 0, 1, -1)
    rows, cols = [], []
    pivots = crossings = 0
    if perturb > 0:
        scale = max(1.0, float(np.abs(z).max(initial=0.0)))
        shift = np.random.default_rng(_PERTURB_SEED).standard_normal(m)
        zp = z + perturb * scale * shift
        state = np.where(zp >= 0, 1, -1)
        p, c = _lad_iterate(w, A, zp, state, rows, cols, max_pivots,
                            pivot_tol, opt_tol, rule)
        pivots, crossings = p, c
        # same basis, signs re-read from the true residuals
        x = _basic_solution(A, z, rows, cols)
        r = z - A @ x
        # rows at (numerically) zero residual keep their sign: both choices
        # are primal feasible and this one is dual feasible
        tiny = perturb * scale * (1.0 + np.abs(shift))
        free = state != 0
        state[free & (r > tiny)] = 1
        state[free & (r < -tiny)] = -1
    p, c = _lad_iterate(w, A, z, state, rows, cols, max_pivots - pivots,
                        pivot_tol, opt_tol, rule)
    pivots += p
    crossings += c
    x = _basic_solution(A, z, rows, cols)
    objective = float(w @ np.abs(z - A @ x))
    return LadResult(x=x, objective=objective, pivots=pivots,
                     breakpoints=crossings,
                     interpolated_rows=np.array(sorted(rows), dtype=np.intp),
                     basic_columns=np.array(sorted(cols), dtype=np.intp))


_PERTURB_SEED = 20_190_707


def _basic_solution(A, z, rows, cols):
    x = np.zeros(A.shape[1])
    if rows:
        x[cols] = np.linalg.solve(A[np.ix_(rows, cols)], z[rows])
    return x


def _lad_iterate(w, A, z, state, rows, cols, max_pivots, pivot_tol, opt_tol,
                 rule):
    """Run the simplex from the basis (state, rows, cols); updates in place.

    ``state[i]`` is +1 when ``u_i`` is basic, -1 when ``v_i`` is, 0 for
    rows in ``I``.  Returns ``(pivots, crossings)``.
    """
    m, n = A.shape
    pricing = _Pricing(rule)
    x = _basic_solution(A, z, rows, cols)
    r = z - A @ x
    pivots = crossings = 0

    while True:
        y = (state * w).astype(float)
        if rows:
            sub = A[np.ix_(rows, cols)]
            free = state != 0
            rhs = -(A[free][:, cols].T @ y[free])
            y[rows] = np.linalg.solve(sub.T, rhs)
        g = A.T @ y
        red_x = np.concatenate([-g, g])
        if cols:
            red_x[cols] = np.inf
            red_x[np.asarray(cols) + n] = np.inf
        in_i = state == 0
        reduced = np.concatenate([red_x, np.where(in_i, w - y, np.inf),
                                  np.where(in_i, w + y, np.inf)])
        q = pricing.enter(reduced, opt_tol)
        if q < 0:
            return pivots, crossings
        if pivots >= max_pivots:
            raise IterationLimitError("pivot cap reached", x=x.copy(),
                                      pivots=pivots)

        dx = np.zeros(n)
        if q < 2 * n:
            j, sigma = (q, 1.0) if q < n else (q - n, -1.0)
            dx[j] = sigma
            if rows:
                dx[cols] = -sigma * np.linalg.solve(sub, A[rows, j])
        else:
            i_enter = (q - 2 * n) % m
            unit = np.zeros(len(rows))
            # u_i raises the residual of row i, v_i lowers it
            unit[rows.index(i_enter)] = -1.0 if q < 2 * n + m else 1.0
            dx[cols] = np.linalg.solve(sub, unit)
        dr = -(A @ dx)

        rate = state * dr
        cand = np.flatnonzero((state != 0) & (rate < -pivot_tol))
        if cand.size == 0:
            raise SimplexError("LP is unbounded")
        theta = np.maximum(state[cand] * r[cand], 0.0) / -rate[cand]
        order = np.lexsort((cand, theta))
        slope = reduced[q] + np.cumsum(2.0 * w[cand[order]] * -rate[cand[order]])
        turned = np.flatnonzero(slope >= -opt_tol)
        stop = int(turned[0]) if turned.size else order.size - 1
        crossed = cand[order[:stop]]
        leave = int(cand[order[stop]])
        step = float(theta[order[stop]])

        pricing.record(step)
        x = x + step * dx
        state[crossed] *= -1
        crossings += crossed.size
        state[leave] = 0
        rows.append(leave)
        if q < 2 * n:
            cols.append(int(q % n))
        else:
            rows.remove(i_enter)
            state[i_enter] = 1 if q < 2 * n + m else -1
        r = z - A @ x
        pivots += 1


def lad_interpolation_oracle(weights, A, z):
    """Brute-force LAD optimum for tiny problems.

    Some optimal solution interpolates ``rank(A)`` rows, so the minimum of
    the weighted residual over all square nonsingular row subsets is the
    LP optimum.  Returns ``(x, objective)``.
    """
    import itertools

    w, A, z = _check_lad(weights, A, z)
    m, n = A.shape
    best_x, best = None, np.inf
    for rows in itertools.combinations(range(m), n):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, z[list(rows)])
        val = float(w @ np.abs(z - A @ x))
        if val < best:
            best_x, best = x, val
    if best_x is None:
        raise ValueError("no nonsingular row subset; oracle needs full column rank")
    return best_x, best
