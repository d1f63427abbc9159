"""XOR games: classical/quantum biases and the game-Bell correspondence.

An XOR game is a sign matrix G[x, y] with an input distribution mu; the
players answer signs a, b and win when a*b = G(x, y).  The bias under a
strategy with correlations C is sum mu*G*C, and win probability is
(1 + bias)/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BellFunctional, ResourceLimitError, SIGNS
from .bounds import _sign_vertex_matrix, nu_corr  # noqa: F401  (re-used LP pieces)
from .lp import LinearProgram, solve_lp
from .sdp import SdpProgram, solve_sdp


@dataclass(frozen=True)
class XorGame:
    G: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        mu = np.atleast_2d(np.asarray(self.mu, dtype=float))
        if G.shape != mu.shape:
            raise ValueError(f"G shape {G.shape} != mu shape {mu.shape}")
        if not np.all(np.abs(G) == 1.0):
            raise ValueError("G entries must be exactly +-1")
        if mu.min() < 0 or abs(mu.sum() - 1.0) > 1e-12:
            raise ValueError("mu must be a probability distribution over inputs")
        for arr in (G, mu):
            arr.flags.writeable = False
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "mu", mu)

    @property
    def nx(self) -> int:
        return self.G.shape[0]

    @property
    def ny(self) -> int:
        return self.G.shape[1]


def chsh_game() -> XorGame:
    """G(x,y) = -1 iff x = y = 1, uniform inputs."""
    return XorGame(np.array([[1.0, 1.0], [1.0, -1.0]]), np.full((2, 2), 0.25))


def bias_of_correlations(game: XorGame, C: np.ndarray) -> float:
    """epsilon_mu(G || C) = sum mu * G * C for a strategy with correlations C."""
    return float(np.sum(game.mu * game.G * np.asarray(C)))


def classical_bias(game: XorGame) -> dict:
    """Exact maximum bias over deterministic sign strategies.

    For each of the 2^nx Alice sign vectors the best Bob reply is
    computed greedily per column, so the enumeration is exponential in
    one side only; the game is transposed first so that side is the
    smaller one.
    """
    if min(game.nx, game.ny) > 20:
        raise ResourceLimitError(
            f"classical bias enumeration over 2^{min(game.nx, game.ny)} strategies refused"
        )
    W = game.mu * game.G
    transposed = game.nx > game.ny
    if transposed:
        W = W.T
    n = W.shape[0]
    best = (-np.inf, None, None)
    for bits in np.ndindex(*(2,) * n):
        u = 1.0 - 2.0 * np.array(bits)
        col = u @ W
        v = np.where(col >= 0, 1.0, -1.0)
        val = float(col @ v)
        if val > best[0]:
            best = (val, u, v)
    bias, u, v = best
    if transposed:
        u, v = v, u
    return {"bias": bias, "u": u, "v": v}


def quantum_bias(game: XorGame) -> dict:
    """Entangled bias: SDP over Gram matrices of unit vectors.

    max sum mu*G*<a_x, b_y> with all vectors unit; by Tsirelson's
    characterization this equals the entangled XOR-game bias.
    """
    n = game.nx + game.ny
    W = np.zeros((n, n))
    W[:game.nx, game.nx:] = game.mu * game.G
    W = 0.5 * (W + W.T)
    prog = SdpProgram([n])
    prog.set_objective({0: -W})
    for k in range(n):
        E = np.zeros((n, n))
        E[k, k] = 1.0
        prog.add_constraint({0: E}, 1.0)
    sol = solve_sdp(prog)
    if sol.status != "optimal":
        raise RuntimeError(f"quantum bias SDP returned {sol.status}")
    return {
        "bias": -float(sol.objective),
        "gram": sol.blocks[0],
        "diagnostics": {"iterations": sol.iterations,
                        "relative_gap": sol.relative_gap},
    }


def game_to_bell(game: XorGame) -> BellFunctional:
    """The correlation Bell functional G o mu with its exact local bound."""
    corr = game.G * game.mu
    coeffs = np.einsum("xy,a,b->xyab", corr, SIGNS, SIGNS)
    return BellFunctional(
        coeffs=coeffs,
        claimed_bound_class="local",
        normalization=classical_bias(game)["bias"],
        corr_coeffs=corr,
    )


def bell_to_game(B) -> XorGame:
    """Inverse of game_to_bell: G = sign(B), mu proportional to |B|.

    Accepts a BellFunctional with a correlation-space form or a raw
    coefficient matrix B[x, y].
    """
    corr = B.corr_coeffs if isinstance(B, BellFunctional) else np.asarray(B, dtype=float)
    if corr is None:
        raise ValueError("functional has no correlation-space coefficients")
    corr = np.atleast_2d(corr)
    total = np.abs(corr).sum()
    if total == 0:
        raise ValueError("degenerate input: all-zero functional")
    G = np.where(corr >= 0, 1.0, -1.0)
    return XorGame(G, np.abs(corr) / total)


def equal_bias_value(C: np.ndarray) -> float:
    """nu(C) through the equal-bias characterization 1 / epsilon_=(C).

    LP: maximize beta over local correlation matrices S (convex hull of
    the sign rank-ones) achieving bias C(x,y)*S(x,y) = beta on every
    input simultaneously.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    nx, ny = C.shape
    S, _ = _sign_vertex_matrix(nx, ny)
    V = S.shape[1]
    n_cells = nx * ny
    # variables: hull weights w (V of them), then beta in [-1, 1]
    n = V + 1
    c = np.zeros(n)
    c[-1] = -1.0
    A_eq = np.zeros((n_cells + 1, n))
    A_eq[:n_cells, :V] = C.reshape(-1)[:, None] * S
    A_eq[:n_cells, -1] = -1.0
    A_eq[n_cells, :V] = 1.0
    b_eq = np.zeros(n_cells + 1)
    b_eq[n_cells] = 1.0
    lb = np.zeros(n)
    lb[-1] = -1.0
    ub = np.full(n, np.inf)
    ub[-1] = 1.0
    sol = solve_lp(LinearProgram(c=c, A_eq=A_eq, b_eq=b_eq, lb=lb, ub=ub))
    if sol.status != "optimal":
        raise RuntimeError(f"equal-bias LP returned {sol.status}")
    beta = -float(sol.objective)
    if beta <= 1e-12:
        raise ValueError(
            f"no equal-bias strategy with positive bias exists (beta* = {beta:.3g})"
        )
    return 1.0 / beta


def epsilon_pub(C: np.ndarray) -> float:
    """Worst-input-distribution public-coin bias: max_S min_xy C(x,y) S(x,y)."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    nx, ny = C.shape
    S, _ = _sign_vertex_matrix(nx, ny)
    V = S.shape[1]
    n_cells = nx * ny
    n = V + 1
    c = np.zeros(n)
    c[-1] = -1.0
    # m <= C*(S w) per cell
    A_ub = np.zeros((n_cells, n))
    A_ub[:, :V] = -(C.reshape(-1)[:, None] * S)
    A_ub[:, -1] = 1.0
    b_ub = np.zeros(n_cells)
    A_eq = np.zeros((1, n))
    A_eq[0, :V] = 1.0
    b_eq = np.array([1.0])
    lb = np.zeros(n)
    lb[-1] = -1.0
    ub = np.full(n, np.inf)
    ub[-1] = 1.0
    sol = solve_lp(LinearProgram(c=c, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=b_ub,
                                 lb=lb, ub=ub))
    if sol.status != "optimal":
        raise RuntimeError(f"epsilon_pub LP returned {sol.status}")
    return -float(sol.objective)


# ---------------------------------------------------------------------------
# JSON I/O


def game_from_json(obj: dict) -> XorGame:
    if not isinstance(obj, dict) or "G" not in obj or "mu" not in obj:
        raise ValueError('game JSON needs "G" and "mu"')
    return XorGame(np.asarray(obj["G"], dtype=float), np.asarray(obj["mu"], dtype=float))


def game_to_json(game: XorGame) -> dict:
    return {"G": game.G.tolist(), "mu": game.mu.tolist()}
