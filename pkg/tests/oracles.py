"""Slow reference implementations used only by the tests.

Everything here works with full message vectors and materialized pairwise
belief tables, so it shares no code path with the reduced O(n^2) engine.
"""

import itertools

import numpy as np


def psi(x, y, i, j):
    """Consistency factor between x_i = x and y_j = y."""
    return 0.0 if (x == j) != (y == i) else 1.0


def full_messages(log_mx, log_my):
    """Expand reduced ratios into full vectors.

    fx[i, j, v] = m_{x_i -> y_j}(y_j = v);  fy[j, i, v] = m_{y_j -> x_i}(x_i = v).
    """
    n = log_mx.shape[0]
    fx = np.ones((n, n, n))
    fy = np.ones((n, n, n))
    for i in range(n):
        for j in range(n):
            fx[i, j, i] = np.exp(log_mx[i, j])
            fy[j, i, j] = np.exp(log_my[j, i])
    return fx, fy


def naive_sweep(w, log_mx, log_my):
    """Undampened sum-product update on full vectors, reduced back to log ratios."""
    n = w.shape[0]
    phi = np.sqrt(w)
    fx, fy = full_messages(log_mx, log_my)
    new_x = np.empty((n, n))
    new_y = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            vec = np.zeros(n)
            for v in range(n):
                for x in range(n):
                    prod = 1.0
                    for k in range(n):
                        if k != j:
                            prod *= fy[k, i, x]
                    vec[v] += phi[i, x] * psi(x, v, i, j) * prod
            not_vals = np.delete(vec, i)
            assert np.allclose(not_vals, not_vals[0], rtol=1e-12)
            new_x[i, j] = np.log(vec[i] / not_vals[0])

            vec = np.zeros(n)
            for v in range(n):
                for y in range(n):
                    prod = 1.0
                    for l in range(n):
                        if l != i:
                            prod *= fx[l, j, y]
                    vec[v] += phi[y, j] * psi(v, y, i, j) * prod
            not_vals = np.delete(vec, j)
            assert np.allclose(not_vals, not_vals[0], rtol=1e-12)
            new_y[j, i] = np.log(vec[j] / not_vals[0])
    return new_x, new_y


def literal_bethe(w, log_mx, log_my, energy="standard"):
    """Bethe free energy summed state by state over explicit belief tables."""
    n = w.shape[0]
    phi = np.sqrt(w)
    fx, fy = full_messages(log_mx, log_my)

    def xlogx(t):
        return t * np.log(t) if t > 0 else 0.0

    f = 0.0
    for i, j in itertools.product(range(n), repeat=2):
        table = np.zeros((n, n))
        for x, y in itertools.product(range(n), repeat=2):
            val = psi(x, y, i, j) * phi[i, x] * phi[y, j]
            for k in range(n):
                if k != j:
                    val *= fy[k, i, x]
            for l in range(n):
                if l != i:
                    val *= fx[l, j, y]
            table[x, y] = val
        table /= table.sum()
        for x, y in itertools.product(range(n), repeat=2):
            b = table[x, y]
            if b > 0:
                f -= b * np.log(psi(x, y, i, j) * phi[i, x] * phi[y, j])
                f += xlogx(b)

    for i in range(n):
        bx = np.array([phi[i, x] * np.prod(fy[:, i, x]) for x in range(n)])
        bx /= bx.sum()
        f -= (n - 1) * sum(xlogx(b) for b in bx)
        if energy == "standard":
            f += (n - 1) * float(np.sum(bx * np.log(phi[i, :])))
    for j in range(n):
        by = np.array([phi[y, j] * np.prod(fx[:, j, y]) for y in range(n)])
        by /= by.sum()
        f -= (n - 1) * sum(xlogx(b) for b in by)
        if energy == "standard":
            f += (n - 1) * float(np.sum(by * np.log(phi[:, j])))
    return f


def bethe_from_belief_matrix(w, b):
    """Closed-form free energy of a doubly stochastic belief matrix.

    ``-sum B log(W/B) - sum (1-B) log(1-B)``; agrees with the message-based
    value at BP fixed points.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(b > 0, b * np.log(b / w), 0.0)
        t2 = np.where(b < 1, (1 - b) * np.log1p(-b), 0.0)
    return float(np.sum(t1) - np.sum(t2))


def kendall_pairs(r1, r2):
    """O(m^2) count of discordant pairs."""
    m = len(r1)
    return sum(
        1
        for a in range(m)
        for b in range(a + 1, m)
        if (r1[a] - r1[b]) * (r2[a] - r2[b]) < 0
    )


def char_poly_roots_3x3(a):
    """Eigenvalues of a symmetric 3x3 matrix as roots of its characteristic polynomial."""
    c2 = -np.trace(a)
    c1 = (a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
          + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
          + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
    c0 = -np.linalg.det(a)
    # trigonometric solution, exact for three real roots
    p = c1 - c2**2 / 3
    q = 2 * c2**3 / 27 - c2 * c1 / 3 + c0
    if abs(p) < 1e-300:
        r = np.cbrt(-q)
        return np.sort(np.array([r, r, r]) - c2 / 3)
    m = 2 * np.sqrt(-p / 3)
    arg = np.clip(3 * q / (p * m), -1.0, 1.0)
    theta = np.arccos(arg) / 3
    roots = m * np.cos(theta - 2 * np.pi * np.arange(3) / 3) - c2 / 3
    return np.sort(roots)
