"""XOR games and the game <-> Bell-functional correspondence.

CHSH is the canonical example: classical bias 1/2 (win probability 3/4),
quantum bias sqrt(2)/2.  Every correlation Bell functional is a scaled
XOR game and vice versa; the equal-bias LP recovers nu on correlation
space.
"""

import numpy as np

from nonsig.bounds import nu_corr, gamma2_corr
from nonsig.games import (
    bell_to_game,
    chsh_game,
    classical_bias,
    epsilon_pub,
    equal_bias_value,
    game_to_bell,
    quantum_bias,
)

game = chsh_game()
cb = classical_bias(game)
qb = quantum_bias(game)
print(f"CHSH classical bias: {cb['bias']:.6f}  (win prob {(1 + cb['bias']) / 2:.4f})")
print(f"       optimal signs: u = {cb['u']}, v = {cb['v']}")
print(f"CHSH quantum bias:   {qb['bias']:.6f}  (Tsirelson sqrt(2)/2 = {np.sqrt(2) / 2:.6f})")

bell = game_to_bell(game)
back = bell_to_game(bell)
print(f"\ngame -> Bell -> game round trip exact: "
      f"{np.array_equal(back.G, game.G) and np.allclose(back.mu, game.mu)}")

C = np.array([[1.0, 1.0], [1.0, -1.0]])
print(f"\nCHSH sign matrix C:")
print(f"  nu(C) via rank-one LP       : {nu_corr(C).value:.6f}")
print(f"  nu(C) via equal-bias LP     : {equal_bias_value(C):.6f}")
print(f"  gamma2(C) factorization SDP : {gamma2_corr(C).value:.6f}")
print(f"  worst-mu public bias eps(C) : {epsilon_pub(C):.6f}  (1/eps = nu)")
