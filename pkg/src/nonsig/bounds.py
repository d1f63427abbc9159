"""Affine-decomposition complexity measures and their certificates.

The central quantities: nu_tilde (minimum L1 mass of an affine model over
local distributions), its epsilon-smoothed variant, the level-1
moment-matrix relaxation gamma2_tilde_1 of the quantum analogue, the
correlation-space versions nu_corr / gamma2_corr, dual Bell/Tsirelson
certificates, and the conversion of these values into communication
lower bounds in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Alphabets,
    AffineModel,
    BellFunctional,
    ConditionalDistribution,
    LocalVertex,
    ResourceLimitError,
    SIGNS,
    TOL_RECON,
    enumerate_local_vertices,
    product_distribution,
    validate,
    vertex_table_matrix,
)
from .lp import LinearProgram, solve_lp
from .sdp import SdpProgram, solve_sdp


class InvalidDistributionError(ValueError):
    """Input distribution fails validation (not normalized / signaling)."""


class ReconstructionError(ValueError):
    """A supplied decomposition does not reproduce the target."""


@dataclass(frozen=True)
class GrothendieckInterval:
    """Published rigorous bounds on Grothendieck's constant K_G.

    The exact value is unknown; assertions of the form "<= K_G * x" use
    the upper end of the interval to stay conservative.
    """

    lower: float = 1.67696
    upper: float = 1.78222


GROTHENDIECK = GrothendieckInterval()


@dataclass
class BoundResult:
    """Value of one of the complexity measures plus its certificates."""

    quantity: str
    value: float
    epsilon: float = 0.0
    primal_certificate: AffineModel | None = None
    dual_certificate: BellFunctional | None = None
    diagnostics: dict = field(default_factory=dict)


def _require_valid(p: ConditionalDistribution) -> None:
    report = validate(p)
    if not report.ok:
        raise InvalidDistributionError(
            "distribution fails validation: " + ", ".join(report.violated_families())
        )


def _project_onto_span(y: np.ndarray, basis_cols: np.ndarray) -> np.ndarray:
    """Orthogonal projection of y onto the column span of basis_cols.

    The dual multipliers of the nu_tilde LP are only determined up to
    directions that vanish on the span of the vertex tables; projecting
    fixes a canonical representative without changing any B(p) value
    for p in that span.
    """
    U, s, _ = np.linalg.svd(basis_cols, full_matrices=False)
    rank = int(np.sum(s > s[0] * 1e-12)) if s.size else 0
    U = U[:, :rank]
    return U @ (U.T @ y)


# ---------------------------------------------------------------------------
# nu_tilde and its epsilon variant (LP over local deterministic vertices)


def nu_tilde(p: ConditionalDistribution) -> BoundResult:
    """Minimum sum |q_i| over affine models of p with local components.

    LP over split weights q = q+ - q- on all local deterministic
    vertices; the equality multipliers give the dual Bell functional.
    """
    _require_valid(p)
    alph = p.alphabets
    Vt = vertex_table_matrix(alph)
    V = Vt.shape[1]
    prob = LinearProgram(
        c=np.ones(2 * V),
        A_eq=np.hstack([Vt, -Vt]),
        b_eq=p.flat(),
        lb=np.zeros(2 * V),
        ub=np.full(2 * V, np.inf),
    )
    sol = solve_lp(prob)
    if sol.status != "optimal":
        # Every valid non-signaling p lies in the affine hull of the local
        # vertices, so this indicates a bug upstream, not a property of p.
        raise RuntimeError(f"nu_tilde LP unexpectedly returned {sol.status}")
    q = sol.x[:V] - sol.x[V:]
    model = AffineModel.from_vertex_weights(alph, q)
    y = _project_onto_span(sol.dual_eq, Vt)
    values_on_vertices = y @ Vt
    bell = BellFunctional(
        coeffs=y.reshape(alph.shape),
        claimed_bound_class="local",
        normalization=float(np.abs(values_on_vertices).max()),
    )
    recon = np.abs(model.evaluate() - p.table).max() if model.components else np.inf
    return BoundResult(
        quantity="nu_tilde",
        value=float(sol.objective),
        primal_certificate=model,
        dual_certificate=bell,
        diagnostics={
            "lp_status": sol.status,
            "iterations": sol.iterations,
            "duality_gap": sol.duality_gap,
            "reconstruction_residual": float(recon),
        },
    )


def nu_tilde_eps(p: ConditionalDistribution, eps: float) -> BoundResult:
    """min { nu_tilde(p') : delta(p, p') <= eps } as a single joint LP.

    Variables are the split vertex weights plus one slack per table cell
    bounding |p - p'|; the per-input slack budgets encode the statistical
    distance ball and p' >= 0 keeps the perturbed target a distribution.
    """
    _require_valid(p)
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    alph = p.alphabets
    Vt = vertex_table_matrix(alph)
    V = Vt.shape[1]
    n_cells = alph.n_cells
    n = 2 * V + n_cells
    pvec = p.flat()

    c = np.zeros(n)
    c[: 2 * V] = 1.0
    A_eq = np.zeros((1, n))
    A_eq[0, :V] = 1.0
    A_eq[0, V:2 * V] = -1.0
    b_eq = np.array([1.0])

    eye = np.eye(n_cells)
    budgets = np.zeros((alph.nx * alph.ny, n_cells))
    for i in range(alph.nx * alph.ny):
        budgets[i, i * alph.na * alph.nb:(i + 1) * alph.na * alph.nb] = 1.0
    A_ub = np.vstack([
        np.hstack([Vt, -Vt, -eye]),          # p' - p <= s
        np.hstack([-Vt, Vt, -eye]),          # p - p' <= s
        np.hstack([-Vt, Vt, np.zeros((n_cells, n_cells))]),  # p' >= 0
        np.hstack([np.zeros((budgets.shape[0], 2 * V)), budgets]),
    ])
    b_ub = np.concatenate([
        pvec, -pvec, np.zeros(n_cells), np.full(alph.nx * alph.ny, 2.0 * eps)
    ])

    sol = solve_lp(LinearProgram(c=c, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=b_ub,
                                 lb=np.zeros(n), ub=np.full(n, np.inf)))
    if sol.status != "optimal":
        raise RuntimeError(f"nu_tilde_eps LP unexpectedly returned {sol.status}")
    q = sol.x[:V] - sol.x[V:2 * V]
    model = AffineModel.from_vertex_weights(alph, q)
    p_prime = (Vt @ q).reshape(alph.shape)
    return BoundResult(
        quantity="nu_tilde_eps",
        value=float(sol.objective),
        epsilon=float(eps),
        primal_certificate=model,
        diagnostics={
            "lp_status": sol.status,
            "iterations": sol.iterations,
            "duality_gap": sol.duality_gap,
            "perturbed_target": p_prime,
            "distance_used": float(
                0.5 * np.abs(p_prime - p.table).sum(axis=(2, 3)).max()
            ),
        },
    )


# ---------------------------------------------------------------------------
# gamma2_tilde_1: level-1 moment-matrix relaxation


def _npa_layout(alph: Alphabets):
    """Index map for the homogenized level-1 moment matrix.

    Row/column 0 is the identity; one outcome per input is eliminated via
    completeness, leaving na-1 (nb-1) projectors per Alice (Bob) input.
    """
    d = 1 + alph.nx * (alph.na - 1) + alph.ny * (alph.nb - 1)

    def ia(x, a):
        return 1 + x * (alph.na - 1) + a

    def ib(y, b):
        return 1 + alph.nx * (alph.na - 1) + y * (alph.nb - 1) + b

    return d, ia, ib


def _sym_unit(d: int, i: int, j: int) -> np.ndarray:
    """Symmetric matrix E with <E, G> = G[i, j] for symmetric G."""
    E = np.zeros((d, d))
    if i == j:
        E[i, i] = 1.0
    else:
        E[i, j] = E[j, i] = 0.5
    return E


def _structural_constraints(prog: SdpProgram, block: int, alph: Alphabets) -> None:
    """Projector structure of one homogenized moment block.

    Diagonal entries equal the first-row entries (E^2 = E) and projectors
    of the same input are orthogonal.
    """
    d, ia, ib = _npa_layout(alph)
    for k in range(1, d):
        M = _sym_unit(d, k, k) - _sym_unit(d, 0, k)
        prog.add_constraint({block: M}, 0.0)
    for x in range(alph.nx):
        for a in range(alph.na - 1):
            for a2 in range(a + 1, alph.na - 1):
                prog.add_constraint({block: _sym_unit(d, ia(x, a), ia(x, a2))}, 0.0)
    for y in range(alph.ny):
        for b in range(alph.nb - 1):
            for b2 in range(b + 1, alph.nb - 1):
                prog.add_constraint({block: _sym_unit(d, ib(y, b), ib(y, b2))}, 0.0)


def _cell_coefficient(alph: Alphabets, x: int, y: int, a: int, b: int) -> np.ndarray:
    """Matrix A with <A, Gamma> = the (a,b|x,y) value implied by a block.

    Eliminated outcomes are recovered through completeness, so cells in
    the last outcome row/column are differences of retained moments.
    """
    d, ia, ib = _npa_layout(alph)
    ra, rb = alph.na - 1, alph.nb - 1
    A = np.zeros((d, d))
    if a < ra and b < rb:
        A += _sym_unit(d, ia(x, a), ib(y, b))
    elif a < ra:  # b is the eliminated outcome
        A += _sym_unit(d, 0, ia(x, a))
        for b2 in range(rb):
            A -= _sym_unit(d, ia(x, a), ib(y, b2))
    elif b < rb:
        A += _sym_unit(d, 0, ib(y, b))
        for a2 in range(ra):
            A -= _sym_unit(d, ia(x, a2), ib(y, b))
    else:
        A += _sym_unit(d, 0, 0)
        for a2 in range(ra):
            A -= _sym_unit(d, 0, ia(x, a2))
        for b2 in range(rb):
            A -= _sym_unit(d, 0, ib(y, b2))
        for a2 in range(ra):
            for b2 in range(rb):
                A += _sym_unit(d, ia(x, a2), ib(y, b2))
    return A


def _block_component(alph: Alphabets, G: np.ndarray, t: float) -> ConditionalDistribution:
    """Distribution represented by one moment block with weight t."""
    tab = np.empty(alph.shape)
    for x in range(alph.nx):
        for y in range(alph.ny):
            for a in range(alph.na):
                for b in range(alph.nb):
                    A = _cell_coefficient(alph, x, y, a, b)
                    tab[x, y, a, b] = np.sum(A * G) / t
    return ConditionalDistribution(alph, tab)


def gamma2_tilde_1(p: ConditionalDistribution) -> BoundResult:
    """Level-1 relaxation of gamma2_tilde: a lower bound on it and on nu_tilde.

    Two homogenized moment blocks carry the positive and negative parts of
    the decomposition; their difference must reproduce p on a linearly
    independent set of coordinates (retained cells, marginals,
    normalization), and the objective is the total scale t+ + t-.
    """
    _require_valid(p)
    alph = p.alphabets
    d, ia, ib = _npa_layout(alph)
    prog = SdpProgram([d, d])
    E00 = _sym_unit(d, 0, 0)
    prog.set_objective({0: E00, 1: E00})
    _structural_constraints(prog, 0, alph)
    _structural_constraints(prog, 1, alph)

    margA = p.marginal_a()
    margB = p.marginal_b()
    data_start = prog.n_constraints
    data_keys = []
    for x in range(alph.nx):
        for y in range(alph.ny):
            for a in range(alph.na - 1):
                for b in range(alph.nb - 1):
                    E = _sym_unit(d, ia(x, a), ib(y, b))
                    prog.add_constraint({0: E, 1: -E}, p.table[x, y, a, b])
                    data_keys.append(("cell", x, y, a, b))
    for x in range(alph.nx):
        for a in range(alph.na - 1):
            E = _sym_unit(d, 0, ia(x, a))
            prog.add_constraint({0: E, 1: -E}, margA[x, a])
            data_keys.append(("margA", x, a))
    for y in range(alph.ny):
        for b in range(alph.nb - 1):
            E = _sym_unit(d, 0, ib(y, b))
            prog.add_constraint({0: E, 1: -E}, margB[y, b])
            data_keys.append(("margB", y, b))
    prog.add_constraint({0: E00, 1: -E00}, 1.0)
    data_keys.append(("norm",))

    sol = solve_sdp(prog)
    if sol.status != "optimal":
        raise RuntimeError(f"gamma2_tilde_1 SDP returned {sol.status}")

    comps = []
    for sign, G in zip((1.0, -1.0), sol.blocks):
        t = float(G[0, 0])
        if t > 1e-8:
            comps.append((sign * t, _block_component(alph, G, t)))
    model = AffineModel(comps, certified_class="npa-level-1")
    recon = float(np.abs(model.evaluate() - p.table).max()) if comps else np.inf
    return BoundResult(
        quantity="gamma2_tilde_1",
        value=float(sol.objective),
        primal_certificate=model,
        diagnostics={
            "sdp_status": sol.status,
            "iterations": sol.iterations,
            "relative_gap": sol.relative_gap,
            "max_equality_residual": sol.max_equality_residual,
            "min_eigenvalue": sol.block_min_eig(),
            "reconstruction_residual": recon,
            "data_dual": sol.dual[data_start:],
            "data_keys": data_keys,
        },
    )


def gamma2_tilde_1_eps(p: ConditionalDistribution, eps: float) -> BoundResult:
    """Epsilon-smoothed level-1 relaxation, as one joint SDP.

    The perturbed target p' is whatever the two moment blocks represent;
    scalar slack blocks bound |p - p'| cellwise with per-input budgets
    2*eps and keep p' nonnegative.
    """
    _require_valid(p)
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    alph = p.alphabets
    d, ia, ib = _npa_layout(alph)
    n_cells = alph.n_cells
    cells = [(x, y, a, b)
             for x in range(alph.nx) for y in range(alph.ny)
             for a in range(alph.na) for b in range(alph.nb)]

    # Blocks: Gamma+, Gamma-, s (one per cell), then inequality slacks.
    dims = [d, d] + [1] * n_cells
    s0 = 2
    w_abs_plus = len(dims)
    dims += [1] * n_cells
    w_abs_minus = len(dims)
    dims += [1] * n_cells
    w_pos = len(dims)
    dims += [1] * n_cells
    w_budget = len(dims)
    dims += [1] * (alph.nx * alph.ny)
    prog = SdpProgram(dims)
    E00 = _sym_unit(d, 0, 0)
    one = np.array([[1.0]])
    prog.set_objective({0: E00, 1: E00})

    _structural_constraints(prog, 0, alph)
    _structural_constraints(prog, 1, alph)
    prog.add_constraint({0: E00, 1: -E00}, 1.0)

    for k, (x, y, a, b) in enumerate(cells):
        A = _cell_coefficient(alph, x, y, a, b)
        pv = p.table[x, y, a, b]
        # p' - p <= s  and  p - p' <= s  and  p' >= 0
        prog.add_constraint({0: A, 1: -A, s0 + k: -one, w_abs_plus + k: one}, pv)
        prog.add_constraint({0: -A, 1: A, s0 + k: -one, w_abs_minus + k: one}, -pv)
        prog.add_constraint({0: A, 1: -A, w_pos + k: -one}, 0.0)
    for i in range(alph.nx * alph.ny):
        coeffs = {w_budget + i: one}
        for k in range(i * alph.na * alph.nb, (i + 1) * alph.na * alph.nb):
            coeffs[s0 + k] = one
        prog.add_constraint(coeffs, 2.0 * eps)

    sol = solve_sdp(prog)
    if sol.status != "optimal":
        raise RuntimeError(f"gamma2_tilde_1_eps SDP returned {sol.status}")
    comps = []
    for sign, G in zip((1.0, -1.0), sol.blocks[:2]):
        t = float(G[0, 0])
        if t > 1e-8:
            comps.append((sign * t, _block_component(alph, G, t)))
    model = AffineModel(comps, certified_class="npa-level-1")
    return BoundResult(
        quantity="gamma2_tilde_1_eps",
        value=float(sol.objective),
        epsilon=float(eps),
        primal_certificate=model,
        diagnostics={
            "sdp_status": sol.status,
            "iterations": sol.iterations,
            "relative_gap": sol.relative_gap,
            "max_equality_residual": sol.max_equality_residual,
            "min_eigenvalue": min(sol.min_eigenvalues[:2]),
        },
    )


# ---------------------------------------------------------------------------
# Correlation-space quantities


def _sign_vertex_matrix(nx: int, ny: int, cap: int = 2_000_000) -> tuple[np.ndarray, list]:
    """Columns are flattened rank-one sign matrices u v^T, u in {+-1}^nx etc."""
    count = 2 ** (nx + ny)
    if count > cap:
        raise ResourceLimitError(
            f"sign-vertex enumeration would produce {count} columns (cap {cap})"
        )
    us = [np.array(bits) for bits in np.ndindex(*(2,) * nx)]
    vs = [np.array(bits) for bits in np.ndindex(*(2,) * ny)]
    cols, pairs = [], []
    for ub in us:
        u = 1.0 - 2.0 * ub
        for vb in vs:
            v = 1.0 - 2.0 * vb
            cols.append(np.outer(u, v).reshape(-1))
            pairs.append((u.copy(), v.copy()))
    return np.array(cols).T, pairs


def nu_corr(C: np.ndarray) -> BoundResult:
    """nu on correlation space: min sum|q| with sum q_i u_i v_i^T = C."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if np.abs(C).max(initial=0.0) > 1.0 + 1e-12:
        raise ValueError("correlation entries must lie in [-1, 1]")
    nx, ny = C.shape
    S, pairs = _sign_vertex_matrix(nx, ny)
    V = S.shape[1]
    prob = LinearProgram(
        c=np.ones(2 * V),
        A_eq=np.hstack([S, -S]),
        b_eq=C.reshape(-1),
        lb=np.zeros(2 * V),
        ub=np.full(2 * V, np.inf),
    )
    sol = solve_lp(prob)
    if sol.status != "optimal":
        raise RuntimeError(f"nu_corr LP returned {sol.status}")
    q = sol.x[:V] - sol.x[V:]
    y = _project_onto_span(sol.dual_eq, S)
    corr_B = y.reshape(nx, ny)
    coeffs = np.einsum("xy,a,b->xyab", corr_B, SIGNS, SIGNS)
    bell = BellFunctional(
        coeffs=coeffs,
        claimed_bound_class="local",
        normalization=float(np.abs(y @ S).max()),
        corr_coeffs=corr_B,
    )
    keep = np.abs(q) > 1e-12
    return BoundResult(
        quantity="nu_corr",
        value=float(sol.objective),
        dual_certificate=bell,
        diagnostics={
            "lp_status": sol.status,
            "iterations": sol.iterations,
            "weights": q[keep],
            "sign_pairs": [pairs[i] for i in np.flatnonzero(keep)],
        },
    )


def gamma2_corr(C: np.ndarray) -> BoundResult:
    """gamma2 factorization norm of C (tight for quantum correlations).

    SDP: minimize the common diagonal value c of a PSD completion
    [[D1, C], [C^T, D2]] with all diagonal entries equal to c; forcing
    equality is harmless since raising a diagonal preserves PSD-ness.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    nx, ny = C.shape
    n = nx + ny
    prog = SdpProgram([n])
    prog.set_objective({0: _sym_unit(n, 0, 0)})
    for k in range(1, n):
        prog.add_constraint({0: _sym_unit(n, k, k) - _sym_unit(n, 0, 0)}, 0.0)
    for i in range(nx):
        for j in range(ny):
            prog.add_constraint({0: _sym_unit(n, i, nx + j)}, C[i, j])
    sol = solve_sdp(prog)
    if sol.status != "optimal":
        raise RuntimeError(f"gamma2_corr SDP returned {sol.status}")
    return BoundResult(
        quantity="gamma2_corr",
        value=float(sol.objective),
        diagnostics={
            "sdp_status": sol.status,
            "iterations": sol.iterations,
            "gram": sol.blocks[0],
            "relative_gap": sol.relative_gap,
        },
    )


def nu_corr_alpha(C: np.ndarray, alpha: float) -> float:
    """Relaxed-correlation nu: min sum|q| with 1 <= C(x,y)*C'(x,y) <= alpha.

    C must be a sign matrix; C' = sum q_i u_i v_i^T is only required to
    agree with C in sign and exceed it cellwise up to factor alpha.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if not np.all(np.abs(C) == 1.0):
        raise ValueError("nu_corr_alpha expects a sign matrix")
    if alpha < 1.0:
        raise ValueError("alpha must be >= 1")
    nx, ny = C.shape
    S, _ = _sign_vertex_matrix(nx, ny)
    V = S.shape[1]
    sign = C.reshape(-1)
    # sign * (S q) in [1, alpha] cellwise
    M = sign[:, None] * np.hstack([S, -S])
    A_ub = np.vstack([-M, M])
    b_ub = np.concatenate([-np.ones(nx * ny), np.full(nx * ny, alpha)])
    sol = solve_lp(LinearProgram(c=np.ones(2 * V), A_ub=A_ub, b_ub=b_ub,
                                 lb=np.zeros(2 * V), ub=np.full(2 * V, np.inf)))
    if sol.status != "optimal":
        raise RuntimeError(f"nu_corr_alpha LP returned {sol.status}")
    return float(sol.objective)


# ---------------------------------------------------------------------------
# Dual certificates


def dual_bell(p: ConditionalDistribution, bound_class: str = "local",
              vertex_cap: int = 4096) -> BellFunctional:
    """Optimal Bell (or level-1 Tsirelson) functional for p.

    local: LP maximizing B(p) subject to |B(vertex)| <= 1 on every local
    deterministic vertex; by duality the optimum equals nu_tilde(p).
    npa-level-1: read off the data-constraint multipliers of the
    gamma2_tilde_1 SDP, folded into a plain coefficient tensor.
    """
    _require_valid(p)
    if bound_class == "npa-level-1":
        return _dual_tsirelson(p)
    if bound_class != "local":
        raise ValueError(f"unknown bound class {bound_class!r}")
    alph = p.alphabets
    if alph.vertex_count > vertex_cap:
        raise ResourceLimitError(
            f"dual LP needs {2 * alph.vertex_count} rows (cap {2 * vertex_cap})"
        )
    Vt = vertex_table_matrix(alph)
    n_cells, V = Vt.shape
    # maximize p.B  <=>  minimize -p.(B1 - B2), |vertex value| <= 1
    c = np.concatenate([-p.flat(), p.flat()])
    block = np.hstack([Vt.T, -Vt.T])
    A_ub = np.vstack([block, -block])
    b_ub = np.ones(2 * V)
    sol = solve_lp(LinearProgram(c=c, A_ub=A_ub, b_ub=b_ub,
                                 lb=np.zeros(2 * n_cells),
                                 ub=np.full(2 * n_cells, np.inf)))
    if sol.status != "optimal":
        raise RuntimeError(f"dual Bell LP returned {sol.status}")
    B = sol.x[:n_cells] - sol.x[n_cells:]
    B = _project_onto_span(B, Vt)
    return BellFunctional(
        coeffs=B.reshape(alph.shape),
        claimed_bound_class="local",
        normalization=float(np.abs(B @ Vt).max()),
    )


def _dual_tsirelson(p: ConditionalDistribution) -> BellFunctional:
    """Fold the gamma2_tilde_1 dual multipliers into a coefficient tensor.

    Marginal multipliers are spread uniformly over the summed-out input,
    and the normalization multiplier over all cells, so that the tensor
    evaluates to the same number on every normalized non-signaling p.
    """
    result = gamma2_tilde_1(p)
    alph = p.alphabets
    y = result.diagnostics["data_dual"]
    keys = result.diagnostics["data_keys"]
    B = np.zeros(alph.shape)
    for mult, key in zip(y, keys):
        if key[0] == "cell":
            _, x, yy, a, b = key
            B[x, yy, a, b] += mult
        elif key[0] == "margA":
            _, x, a = key
            B[x, :, a, :] += mult / alph.ny
        elif key[0] == "margB":
            _, yy, b = key
            B[:, yy, :, b] += mult / alph.nx
        else:  # normalization
            B += mult / (alph.nx * alph.ny)
    return BellFunctional(
        coeffs=B,
        claimed_bound_class="npa-level-1",
        normalization=1.0,
    )


# ---------------------------------------------------------------------------
# Decompositions and structural checks


def quantum_to_local_decomposition(p: ConditionalDistribution,
                                   corr_decomposer=None) -> AffineModel:
    """Affine model of the dummy-outcome extension of p from binary blocks.

    Extends both alphabets with an extra outcome (the last index) and
    writes the extended p as  sum_{ab} p_ab - (B-1) p_A - (A-1) p_B
    - (AB-A-B+1) p_empty, where each p_ab is supported on a 2x2
    sub-alphabet.  If corr_decomposer is given it is applied to each
    binary block (as a 2-outcome distribution) and the sub-models are
    spliced in, e.g. to push the blocks all the way down to local
    deterministic components.
    """
    _require_valid(p)
    alph = p.alphabets
    nx, ny, na, nb = alph.shape
    ext = Alphabets(nx, ny, na + 1, nb + 1)
    pA = p.marginal_a()
    pB = p.marginal_b()

    def embed(block_2x2, a, b):
        """Lift a binary table on outcomes {a, empty} x {b, empty}."""
        T = np.zeros(ext.shape)
        T[:, :, a, b] = block_2x2[:, :, 0, 0]
        T[:, :, a, nb] = block_2x2[:, :, 0, 1]
        T[:, :, na, b] = block_2x2[:, :, 1, 0]
        T[:, :, na, nb] = block_2x2[:, :, 1, 1]
        return T

    comps = []
    for a in range(na):
        for b in range(nb):
            blk = np.empty((nx, ny, 2, 2))
            joint = p.table[:, :, a, b]
            blk[:, :, 0, 0] = joint
            blk[:, :, 0, 1] = pA[:, a][:, None] - joint
            blk[:, :, 1, 0] = pB[:, b][None, :] - joint
            blk[:, :, 1, 1] = 1.0 - pA[:, a][:, None] - pB[:, b][None, :] + joint
            if corr_decomposer is None:
                comps.append((1.0, ConditionalDistribution(
                    ext, embed(blk, a, b))))
            else:
                sub = corr_decomposer(
                    ConditionalDistribution(Alphabets(nx, ny, 2, 2), blk))
                for w, comp in sub.components:
                    t = comp.table() if isinstance(comp, LocalVertex) else comp.table
                    comps.append((w, ConditionalDistribution(ext, embed(t, a, b))))

    TA = np.zeros(ext.shape)
    TA[:, :, :na, nb] = pA[:, None, :]
    comps.append((-(nb - 1.0), ConditionalDistribution(ext, TA)))
    TB = np.zeros(ext.shape)
    TB[:, :, na, :nb] = pB[None, :, :]
    comps.append((-(na - 1.0), ConditionalDistribution(ext, TB)))
    TE = np.zeros(ext.shape)
    TE[:, :, na, nb] = 1.0
    comps.append((-(na * nb - na - nb + 1.0), ConditionalDistribution(ext, TE)))
    return AffineModel(comps, certified_class="local")


def extended_table(p: ConditionalDistribution) -> np.ndarray:
    """p embedded in the dummy-outcome alphabet (extra outcome never occurs)."""
    nx, ny, na, nb = p.alphabets.shape
    T = np.zeros((nx, ny, na + 1, nb + 1))
    T[:, :, :na, :nb] = p.table
    return T


def gap_check(p: ConditionalDistribution) -> dict:
    """Compare nu_tilde against the Grothendieck-type multiple of gamma2.

    Uses the level-1 relaxation in place of the true gamma2, which only
    makes the inequality harder to satisfy (the relaxation is a lower
    bound), so a pass is a conservative check; the report flags this.
    """
    nu = nu_tilde(p)
    g2 = gamma2_tilde_1(p)
    alph = p.alphabets
    K = GROTHENDIECK.upper
    binary = alph.binary
    if binary:
        bound = (2.0 * K + 1.0) * g2.value
    else:
        bound = (2.0 * alph.na * alph.nb * (K + 1.0) - 1.0) * g2.value
    return {
        "nu": nu.value,
        "gamma2_1": g2.value,
        "ratio": nu.value / g2.value,
        "bound_2K_plus_1": (2.0 * K + 1.0) * g2.value if binary else None,
        "bound_general": (2.0 * alph.na * alph.nb * (K + 1.0) - 1.0) * g2.value,
        "binary": binary,
        "holds": nu.value <= bound + 1e-4,
        "uses_relaxation": True,
    }


def scaled_local_reconstruction(p: ConditionalDistribution, t: int,
                                p_l: ConditionalDistribution,
                                pA: np.ndarray, pB: np.ndarray) -> AffineModel:
    """Two-term affine model p = 2^t p_l + (1 - 2^t) pA x pB.

    This is the decomposition induced by a t-bit one-way protocol; its
    mass 2^(t+1) - 1 upper-bounds nu_tilde(p).
    """
    _require_valid(p_l)
    prod = product_distribution(pA, pB)
    _require_valid(prod)
    w = float(2 ** t)
    comps = [(w, p_l)]
    if t > 0:
        comps.append((1.0 - w, prod))
    model = AffineModel(comps, certified_class="local")
    resid = np.abs(model.evaluate() - p.table).max()
    if resid > TOL_RECON:
        raise ReconstructionError(
            f"2^t p_l + (1-2^t) pA.pB misses the target by {resid:.3g}; "
            "p_l does not come from a t-bit protocol for p"
        )
    return model


# ---------------------------------------------------------------------------
# Communication lower bounds and reporting


def lower_bound_bits(result: BoundResult) -> dict:
    """Convert a bound value into communication lower bounds in bits.

    Randomized public-coin bits for the nu family, entangled-quantum
    bits for the gamma2 family, and the sharper correlation-only form
    log2(value) for the correlation quantities.
    """
    v = result.value
    if v < 1.0 - 1e-7 and result.quantity in (
            "nu_tilde", "nu_tilde_eps", "gamma2_tilde_1", "gamma2_tilde_1_eps"):
        raise ValueError(f"bound value {v} below 1 for {result.quantity}")
    report = {}
    notes = []

    def clamp(name, value):
        if value < 0.0:
            notes.append(f"{name} clamped to 0 (raw {value:.6g})")
            return 0.0
        return value

    log2v = math.log2(max(v, 1e-300))
    if result.quantity in ("nu_tilde", "nu_tilde_eps", "nu_corr"):
        report["r_pub"] = clamp("r_pub", log2v - 1.0)
    if result.quantity in ("gamma2_tilde_1", "gamma2_tilde_1_eps", "gamma2_corr"):
        report["q_ent"] = clamp("q_ent", 0.5 * log2v - 1.0)
    if result.quantity in ("nu_corr", "gamma2_corr"):
        report["q_ent_corr"] = clamp("q_ent_corr", log2v)
    if notes:
        report["notes"] = notes
    return report


def bound_report(result: BoundResult) -> dict:
    """JSON-friendly report of a BoundResult."""
    out = {
        "quantity": result.quantity,
        "value": result.value,
        "epsilon": result.epsilon,
        "bits": lower_bound_bits(result) if result.value >= 1.0 - 1e-7 else {},
    }
    model = result.primal_certificate
    if model is not None and model.components:
        cert = []
        for w, comp in model.components:
            if isinstance(comp, LocalVertex):
                cert.append({"weight": w, "lambda_a": list(comp.lambda_a),
                             "lambda_b": list(comp.lambda_b)})
            else:
                cert.append({"weight": w, "table": comp.table.tolist()})
        out["primal_certificate"] = {
            "class": model.certified_class,
            "mass": model.mass,
            "components": cert,
        }
    bell = result.dual_certificate
    if bell is not None:
        out["dual_certificate"] = {
            "class": bell.claimed_bound_class,
            "normalization": bell.normalization,
            "coeffs": bell.coeffs.tolist(),
        }
    diag = {}
    for k, v in result.diagnostics.items():
        if isinstance(v, (int, float, str, bool)):
            diag[k] = v
    out["diagnostics"] = diag
    return out
