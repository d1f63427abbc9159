"""Shared generators for the test suite.

Random non-signaling distributions are produced by optimizing random
objectives over the non-signaling polytope with the package's own LP
engine (giving polytope vertices such as PR-like boxes) and blending
them with random local mixtures, so both local and nonlocal points are
covered.
"""

import numpy as np

from nonsig.core import Alphabets, ConditionalDistribution, vertex_table_matrix
from nonsig.lp import LinearProgram, solve_lp


def random_local_mixture(rng, alph: Alphabets, concentration=0.3) -> ConditionalDistribution:
    """Random convex combination of local deterministic vertices."""
    Vt = vertex_table_matrix(alph)
    w = rng.dirichlet(np.full(Vt.shape[1], concentration))
    return ConditionalDistribution(alph, (Vt @ w).reshape(alph.shape))


def nonsignaling_equalities(alph: Alphabets):
    """(A, b) with A p_flat = b encoding normalization and non-signaling."""
    nx, ny, na, nb = alph.shape
    n = alph.n_cells

    def idx(x, y, a, b):
        return ((x * ny + y) * na + a) * nb + b

    rows, rhs = [], []
    for x in range(nx):
        for y in range(ny):
            r = np.zeros(n)
            for a in range(na):
                for b in range(nb):
                    r[idx(x, y, a, b)] = 1.0
            rows.append(r)
            rhs.append(1.0)
    for x in range(nx):
        for a in range(na):
            for y in range(1, ny):
                r = np.zeros(n)
                for b in range(nb):
                    r[idx(x, y, a, b)] = 1.0
                    r[idx(x, 0, a, b)] -= 1.0
                rows.append(r)
                rhs.append(0.0)
    for y in range(ny):
        for b in range(nb):
            for x in range(1, nx):
                r = np.zeros(n)
                for a in range(na):
                    r[idx(x, y, a, b)] = 1.0
                    r[idx(0, y, a, b)] -= 1.0
                rows.append(r)
                rhs.append(0.0)
    return np.array(rows), np.array(rhs)


def random_nonsignaling_vertex(rng, alph: Alphabets) -> ConditionalDistribution:
    """A vertex of the non-signaling polytope maximizing a random objective."""
    A, b = nonsignaling_equalities(alph)
    c = rng.normal(size=alph.n_cells)
    sol = solve_lp(LinearProgram(c=c, A_eq=A, b_eq=b,
                                 lb=np.zeros(alph.n_cells),
                                 ub=np.ones(alph.n_cells)))
    assert sol.status == "optimal", sol.status
    return ConditionalDistribution(alph, sol.x.reshape(alph.shape))


def random_nonsignaling(rng, alph: Alphabets, nonlocal_weight=0.5) -> ConditionalDistribution:
    """Blend of a non-signaling polytope vertex with a local mixture."""
    v = random_nonsignaling_vertex(rng, alph)
    m = random_local_mixture(rng, alph)
    t = rng.uniform(0, nonlocal_weight)
    return ConditionalDistribution(alph, (1 - t) * m.table + t * v.table)


def random_correlation_rep(rng, nx, ny, scale=0.4):
    """Random valid binary (C, MA, MB) triple, mildly nonlocal at most."""
    from nonsig.core import CorrelationRep

    while True:
        C = rng.uniform(-scale, scale, size=(nx, ny))
        MA = rng.uniform(-scale / 2, scale / 2, size=nx)
        MB = rng.uniform(-scale / 2, scale / 2, size=ny)
        rep = CorrelationRep(C, MA, MB)
        if rep.min_implied_probability() >= 0.0:
            return rep
