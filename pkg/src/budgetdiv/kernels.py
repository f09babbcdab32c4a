"""Hot numeric kernels: welfare ascent and a dense float simplex/leximin.

Every kernel is written in nopython-compatible numpy style and compiled
with numba's @njit when available.  Setting the environment variable
``BUDGETDIV_NO_NUMBA=1`` (or uninstalling numba) selects the pure-numpy
fallback path: identical algorithms, interpreted execution.  The choice is
made once at import time; ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag instead
    numba = None
    _HAVE_NUMBA = False


def _numba_disabled():
    flag = os.environ.get("BUDGETDIV_NO_NUMBA", "").strip().lower()
    return flag not in ("", "0", "false", "no")


NUMBA_ENABLED = _HAVE_NUMBA and not _numba_disabled()


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"


def _jit(func):
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(func)
    return func


# ---------------------------------------------------------------------------
# welfare ascent on the candidate simplex
#
# Multiplicative update p_x <- p_x * g_x / mu with g_x = sum_{i: x in A_i} w_i,
# where w_i = 1/u_i for log welfare (alpha = 0) and w_i = alpha * u_i^(alpha-1)
# for power welfare, and mu = sum_x p_x g_x.  The update preserves the simplex
# exactly.  An adaptive exponent accelerates the geometric decay of candidates
# leaving the support; any step that would lower the welfare falls back to the
# plain update, which in turn is damped by averaging with the previous iterate
# if it still decreases the objective.
#
# Stationarity (KKT) is sufficient for global optimality here, so the
# certificate arbitrates support identification: small decaying shares are
# zeroed outright (boundary-degenerate candidates otherwise decay only
# harmonically), a tiny or zeroed candidate whose marginal exceeds mu is
# regrown by an exact line search toward its vertex, and near-stationary
# iterates are finished by an active-set Newton polish.  A wrong zero
# therefore self-heals, per-candidate caps keep prune and regrow from
# cycling, and a candidate that genuinely cannot be classified ends the run
# as an honest non-convergence, never a wrong certificate.
# ---------------------------------------------------------------------------

BETA_MAX = 256.0
SUPPORT_EPS = 1e-9
PRUNE_SHARE = 1e-4
SWEEP_SHARE = 1e-8
GROW_SHARE = 1e-6
MAX_PRUNES = 3
MAX_GROWTH_STEPS = 12


@_jit
def _line_search_toward(A, p, u, alpha, x, n):
    """Step size maximizing the welfare along (1-s) p + s e_x, by bisection
    on the directional derivative (the 1-D objective is concave)."""
    lo = 0.0
    hi = 0.999
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        d = 0.0
        for i in range(n):
            ui = (1.0 - mid) * u[i] + mid * A[i, x]
            if alpha == 0.0:
                d += (A[i, x] - u[i]) / ui
            else:
                d += alpha * ui ** (alpha - 1.0) * (A[i, x] - u[i])
        if d > 0.0:
            lo = mid
        else:
            hi = mid
    return lo


@_jit
def _polish(A, p, alpha, eps, cert_eps):
    """Active-set Newton polish of a near-stationary point, in place.

    Solves the stationarity system (marginals equal on the support, shares
    summing to one) by Newton steps, dropping coordinates whose share hits
    zero and line-searching in any off-support candidate whose marginal
    exceeds the threshold.  Returns 1 iff the full certificate holds.
    """
    n, m = A.shape
    u = np.empty(n)
    g = np.empty(m)
    S = np.empty(m, dtype=np.int64)
    for _round in range(4 * m + 16):
        k = 0
        for x in range(m):
            if p[x] > 0.0:
                S[k] = x
                k += 1
        if k == 0:
            return 0
        dropped = False
        for _nit in range(60):
            mu, _ = _welfare_terms(A, p, alpha, u, g)
            fmax = 0.0
            for a in range(k):
                d = abs(g[S[a]] - mu)
                if d > fmax:
                    fmax = d
            ssum = 0.0
            for a in range(k):
                ssum += p[S[a]]
            if fmax <= 0.5 * cert_eps * mu and abs(ssum - 1.0) <= 1e-14:
                break
            J = np.zeros((k + 1, k + 1))
            rhs = np.zeros(k + 1)
            for i in range(n):
                if alpha == 0.0:
                    h2 = -1.0 / (u[i] * u[i])
                else:
                    h2 = alpha * (alpha - 1.0) * u[i] ** (alpha - 2.0)
                for a in range(k):
                    if A[i, S[a]] != 0.0:
                        for b in range(k):
                            if A[i, S[b]] != 0.0:
                                J[a, b] += h2
            reg = 0.0
            for a in range(k):
                if -J[a, a] > reg:
                    reg = -J[a, a]
            for a in range(k):
                J[a, a] -= 1e-12 * reg
                J[a, k] = -1.0
                J[k, a] = 1.0
                rhs[a] = mu - g[S[a]]
            rhs[k] = 1.0 - ssum
            sol = np.linalg.lstsq(J, rhs.reshape(k + 1, 1))[0].ravel()
            finite = True
            for a in range(k + 1):
                if not np.isfinite(sol[a]):
                    finite = False
            if not finite:
                return 0
            step = 1.0
            for a in range(k):
                if sol[a] < 0.0 and p[S[a]] + sol[a] <= 0.0:
                    cand = -p[S[a]] / sol[a]
                    if cand < step:
                        step = cand
            for a in range(k):
                p[S[a]] += step * sol[a]
            if step < 1.0:
                for a in range(k):
                    if p[S[a]] <= 1e-14:
                        p[S[a]] = 0.0
                        dropped = True
                if dropped:
                    break
        if dropped:
            continue
        mu, _ = _welfare_terms(A, p, alpha, u, g)
        worst = -1
        wgap = eps * mu
        for x in range(m):
            if p[x] == 0.0 and g[x] - mu > wgap:
                wgap = g[x] - mu
                worst = x
        if worst < 0:
            fmax = 0.0
            for a in range(k):
                d = abs(g[S[a]] - mu)
                if d > fmax:
                    fmax = d
            if fmax <= cert_eps * mu:
                return 1
            return 0
        s = _line_search_toward(A, p, u, alpha, worst, n)
        if s <= 0.0:
            return 0
        for x in range(m):
            p[x] *= 1.0 - s
        p[worst] += s
    return 0


@_jit
def _welfare_terms(A, p, alpha, u, g):
    """Fill utilities u and marginal weights g for shares p; return (mu, obj)."""
    n, m = A.shape
    for i in range(n):
        s = 0.0
        for x in range(m):
            if A[i, x] != 0.0:
                s += p[x]
        u[i] = s
    for x in range(m):
        g[x] = 0.0
    mu = 0.0
    obj = 0.0
    for i in range(n):
        if alpha == 0.0:
            w = 1.0 / u[i]
            obj += np.log(u[i])
        else:
            w = alpha * u[i] ** (alpha - 1.0)
            obj += u[i] ** alpha
        mu += w * u[i]
        for x in range(m):
            if A[i, x] != 0.0:
                g[x] += w
    return mu, obj


@_jit
def _objective(A, p, alpha):
    n, m = A.shape
    obj = 0.0
    for i in range(n):
        s = 0.0
        for x in range(m):
            if A[i, x] != 0.0:
                s += p[x]
        if s <= 0.0:
            return -1e300
        if alpha == 0.0:
            obj += np.log(s)
        else:
            obj += s ** alpha
    return obj


@_jit
def welfare_ascent(A, alpha, eps, max_iter):
    """Maximize sum_i h(u_i) over the simplex for h = log (alpha=0) or x^alpha.

    A is the (n, m) 0/1 approval matrix.  Returns (shares, residual, iters)
    where residual is the relative stationarity gap: the one-sided excess of
    any marginal over mu, and the two-sided gap on shares above SUPPORT_EPS.
    """
    n, m = A.shape
    p = np.full(m, 1.0 / m)
    q = np.empty(m)
    u = np.empty(n)
    g = np.empty(m)
    prunes = np.zeros(m, dtype=np.int64)
    grown = np.zeros(m, dtype=np.int64)
    cert_eps = max(eps, 1e-9)
    beta = 1.0
    prev_resid = 1e300
    resid = 1e300
    it = 0
    while it < max_iter:
        it += 1
        mu, obj = _welfare_terms(A, p, alpha, u, g)
        onesided = 0.0
        supported = 0.0
        for x in range(m):
            d = g[x] - mu
            if d > onesided:
                onesided = d
            if p[x] > SUPPORT_EPS and abs(d) > supported:
                supported = abs(d)
        resid = max(onesided, supported) / mu
        if onesided <= eps * mu and supported <= cert_eps * mu:
            break
        # Hand a near-stationary iterate to the active-set Newton polish; the
        # multiplicative update identifies the support quickly but crawls on
        # ill-conditioned or boundary-degenerate instances.  The polished
        # point only replaces the iterate when its certificate passes.
        if resid <= 1e-4 or it % 256 == 0:
            for x in range(m):
                q[x] = p[x]
            if _polish(A, q, alpha, eps, cert_eps) == 1:
                for x in range(m):
                    p[x] = q[x]
                mu, _ = _welfare_terms(A, p, alpha, u, g)
                onesided = 0.0
                supported = 0.0
                for x in range(m):
                    d = g[x] - mu
                    if d > onesided:
                        onesided = d
                    if p[x] > SUPPORT_EPS and abs(d) > supported:
                        supported = abs(d)
                resid = max(onesided, supported) / mu
                break
        # A tiny or zeroed share with a positive marginal gap belongs in the
        # support (so a wrong prune lands here too); the multiplicative update
        # would regrow it from nothing only geometrically in the gap, so take
        # one exact line-search step straight toward its vertex instead.
        gx = -1
        ggap = eps * mu
        for x in range(m):
            if p[x] < GROW_SHARE and g[x] - mu > ggap and grown[x] < MAX_GROWTH_STEPS:
                ggap = g[x] - mu
                gx = x
        if gx >= 0:
            s = _line_search_toward(A, p, u, alpha, gx, n)
            if s > 0.0:
                for x in range(m):
                    p[x] *= 1.0 - s
                p[gx] += s
                grown[gx] += 1
                prev_resid = 1e300
                beta = 1.0
                continue
        # The exponent ramps while the stationarity gap is not getting worse;
        # it is residual-driven because objective progress drowns in float
        # noise long before the gap reaches eps.
        if resid <= prev_resid:
            beta = min(beta * 1.25, BETA_MAX)
        else:
            beta = 1.0
        prev_resid = resid
        total = 0.0
        for x in range(m):
            q[x] = p[x] * (g[x] / mu) ** beta
            total += q[x]
        for x in range(m):
            q[x] /= total
        if beta > 1.0 and _objective(A, q, alpha) < obj:
            beta = 1.0
            total = 0.0
            for x in range(m):
                q[x] = p[x] * g[x] / mu
                total += q[x]
            for x in range(m):
                q[x] /= total
        if _objective(A, q, alpha) < obj:
            for x in range(m):
                q[x] = 0.5 * (q[x] + p[x])
        # Zero out decaying stragglers; the reseed path undoes a wrong prune.
        pruned = False
        for x in range(m):
            if q[x] == 0.0:
                continue
            if (q[x] < PRUNE_SHARE and g[x] <= mu * (1.0 - 1e-8)
                    and prunes[x] < MAX_PRUNES):
                q[x] = 0.0
                prunes[x] += 1
                pruned = True
            elif q[x] < SWEEP_SHARE and g[x] <= mu * (1.0 + eps):
                q[x] = 0.0
                pruned = True
        if pruned:
            total = 0.0
            for x in range(m):
                total += q[x]
            for x in range(m):
                q[x] /= total
            prev_resid = 1e300
        for x in range(m):
            p[x] = q[x]
    return p, resid, it


@_jit
def stationarity_residual(A, p, alpha):
    """Relative KKT residual of shares p: (supported two-sided, global one-sided)."""
    n, m = A.shape
    u = np.empty(n)
    g = np.empty(m)
    mu, _ = _welfare_terms(A, p, alpha, u, g)
    supported = 0.0
    onesided = 0.0
    for x in range(m):
        d = g[x] - mu
        if d > onesided:
            onesided = d
        if p[x] > 0.0 and abs(d) > supported:
            supported = abs(d)
    return supported / mu, onesided / mu


# ---------------------------------------------------------------------------
# dense two-phase simplex, float64
#
# maximize c.x  s.t.  Aub x <= bub,  Aeq x = beq,  x >= 0
# status: 0 optimal, 1 infeasible, 2 unbounded, 3 pivot limit
# ---------------------------------------------------------------------------

_SIMPLEX_TOL = 1e-9


@_jit
def _pivot_f64(T, basis, row, col):
    nrows, ncols = T.shape
    piv = T[row, col]
    for j in range(ncols):
        T[row, j] /= piv
    for r in range(nrows):
        if r != row:
            f = T[r, col]
            if f != 0.0:
                for j in range(ncols):
                    T[r, j] -= f * T[row, j]
    basis[row] = col


@_jit
def _iterate_f64(T, basis, nrows, ncols, art_start, max_pivots):
    dantzig_budget = 3 * (nrows + ncols)
    pivots = 0
    while pivots < max_pivots:
        pivots += 1
        col = -1
        if pivots <= dantzig_budget:
            best = -_SIMPLEX_TOL
            for j in range(art_start):
                if T[nrows, j] < best:
                    best = T[nrows, j]
                    col = j
        else:
            for j in range(art_start):
                if T[nrows, j] < -_SIMPLEX_TOL:
                    col = j
                    break
        if col < 0:
            return 0
        row = -1
        best_ratio = 1e300
        for r in range(nrows):
            a = T[r, col]
            if a > _SIMPLEX_TOL:
                ratio = T[r, ncols - 1] / a
                if ratio < best_ratio - 1e-12:
                    best_ratio = ratio
                    row = r
                elif ratio < best_ratio + 1e-12 and row >= 0 and basis[r] < basis[row]:
                    row = r
        if row < 0:
            return 2
        _pivot_f64(T, basis, row, col)
    return 3


@_jit
def simplex_f64(c, Aub, bub, Aeq, beq):
    n_ub = Aub.shape[0]
    n_eq = Aeq.shape[0]
    nvar = c.shape[0]
    nrows = n_ub + n_eq
    art_start = nvar + n_ub
    ncols = art_start + nrows + 1
    T = np.zeros((nrows + 1, ncols))
    basis = np.empty(nrows, dtype=np.int64)
    for r in range(nrows):
        if r < n_ub:
            b = bub[r]
            sgn = -1.0 if b < 0.0 else 1.0
            for j in range(nvar):
                T[r, j] = sgn * Aub[r, j]
            T[r, nvar + r] = sgn
            T[r, ncols - 1] = sgn * b
        else:
            k = r - n_ub
            b = beq[k]
            sgn = -1.0 if b < 0.0 else 1.0
            for j in range(nvar):
                T[r, j] = sgn * Aeq[k, j]
            T[r, ncols - 1] = sgn * b
        T[r, art_start + r] = 1.0
        basis[r] = art_start + r
    # Phase 1: minimize artificial sum (stored as its negation in the obj row).
    for j in range(ncols):
        s = 0.0
        for r in range(nrows):
            s += T[r, j]
        T[nrows, j] = -s
    for r in range(nrows):
        T[nrows, basis[r]] = 0.0
    status = _iterate_f64(T, basis, nrows, ncols, art_start, 10000)
    x = np.zeros(nvar)
    if status == 3:
        return 3, x, 0.0
    if -T[nrows, ncols - 1] > 1e-7:
        return 1, x, 0.0
    for r in range(nrows):
        if basis[r] >= art_start:
            for j in range(art_start):
                if abs(T[r, j]) > _SIMPLEX_TOL:
                    _pivot_f64(T, basis, r, j)
                    break
    # Phase 2.
    for j in range(ncols):
        T[nrows, j] = 0.0
    for j in range(nvar):
        T[nrows, j] = -c[j]
    for r in range(nrows):
        coef = T[nrows, basis[r]]
        if coef != 0.0:
            for j in range(ncols):
                T[nrows, j] -= coef * T[r, j]
    status = _iterate_f64(T, basis, nrows, ncols, art_start, 10000)
    for r in range(nrows):
        if basis[r] < nvar:
            x[basis[r]] = T[r, ncols - 1]
    if status != 0:
        return status, x, 0.0
    val = 0.0
    for j in range(nvar):
        val += c[j] * x[j]
    return 0, x, val


# ---------------------------------------------------------------------------
# float leximin over utilities u_i = A_i . p on the candidate simplex
# ---------------------------------------------------------------------------

_LEX_TOL = 1e-9


@_jit
def _leximin_floor_rows(A, fixed, level, tstar, Aub, bub):
    """Constraint rows: -A_i p (+ t) <= -floor_i, floors from fixed levels."""
    n, m = A.shape
    for i in range(n):
        for x in range(m):
            Aub[i, x] = -A[i, x]
        Aub[i, m] = 0.0
        if fixed[i]:
            bub[i] = -level[i]
        else:
            bub[i] = -tstar
    return Aub, bub


@_jit
def leximin_f64(A):
    """Leximin-optimal utilities over the simplex; returns (u, shares, status).

    Iterated LPs: maximize the floor, then fix exactly the voters whose
    utility cannot exceed the floor at any optimum (one test LP per tight
    voter), and repeat on the rest.
    """
    n, m = A.shape
    nvar = m + 1  # shares plus the floor variable t
    fixed = np.zeros(n, dtype=np.bool_)
    level = np.zeros(n)
    shares = np.zeros(m)
    status = 0
    Aeq = np.zeros((1, nvar))
    beq = np.ones(1)
    for x in range(m):
        Aeq[0, x] = 1.0
    Aub = np.zeros((n, nvar))
    bub = np.zeros(n)
    c = np.zeros(nvar)
    c2 = np.zeros(nvar)
    u = np.zeros(n)
    for _level in range(n):
        done = True
        for i in range(n):
            if not fixed[i]:
                done = False
                break
        if done:
            break
        # Floor LP: maximize t subject to unfixed utilities >= t.
        for i in range(n):
            for x in range(m):
                Aub[i, x] = -A[i, x]
            if fixed[i]:
                Aub[i, m] = 0.0
                bub[i] = -level[i]
            else:
                Aub[i, m] = 1.0
                bub[i] = 0.0
        for j in range(nvar):
            c[j] = 0.0
        c[m] = 1.0
        st, xopt, tstar = simplex_f64(c, Aub, bub, Aeq, beq)
        if st != 0:
            status = st
            break
        for x in range(m):
            shares[x] = xopt[x]
        for i in range(n):
            s = 0.0
            for x in range(m):
                if A[i, x] != 0.0:
                    s += xopt[x]
            u[i] = s
        newly = 0
        _leximin_floor_rows(A, fixed, level, tstar, Aub, bub)
        for i in range(n):
            if fixed[i] or u[i] > tstar + _LEX_TOL:
                continue
            # Can voter i exceed the floor while everyone else keeps it?
            for j in range(nvar):
                c2[j] = A[i, j] if j < m else 0.0
            st2, x2, vi = simplex_f64(c2, Aub, bub, Aeq, beq)
            if st2 != 0:
                status = st2
                return u, shares, status
            if vi <= tstar + _LEX_TOL:
                fixed[i] = True
                level[i] = tstar
                newly += 1
        if newly == 0:
            # Defensive: tolerance noise left nothing to fix; pin the minimum.
            imin = -1
            umin = 1e300
            for i in range(n):
                if not fixed[i] and u[i] < umin:
                    umin = u[i]
                    imin = i
            fixed[imin] = True
            level[imin] = tstar
    for i in range(n):
        s = 0.0
        for x in range(m):
            if A[i, x] != 0.0:
                s += shares[x]
        u[i] = s
    return u, shares, status
