"""Walk through the headline quantities on the PR box.

The PR box is the non-signaling extreme point with correlations
C(x,y) = (-1)^(x AND y) and uniform marginals.  Its affine-model mass
over local strategies is exactly 2, while the level-1 quantum relaxation
gives sqrt(2) -- the CHSH story in LP/SDP form.
"""

import numpy as np

from nonsig.bounds import dual_bell, gamma2_tilde_1, lower_bound_bits, nu_tilde
from nonsig.core import enumerate_local_vertices, pr_box

p = pr_box()
print("PR box table p(a,b|x,y):")
print(p.table.reshape(4, 4))

res = nu_tilde(p)
print(f"\nnu_tilde(PR) = {res.value:.6f}   (local affine-model mass)")
print(f"certificate: {len(res.primal_certificate.components)} weighted local vertices,"
      f" mass {res.primal_certificate.mass:.6f}")
print("communication lower bounds:", lower_bound_bits(res))

g2 = gamma2_tilde_1(p)
print(f"\ngamma2_tilde^1(PR) = {g2.value:.6f}   (expected sqrt(2) = {np.sqrt(2):.6f})")

bell = dual_bell(p, "local")
print(f"\ndual Bell functional: B(PR) = {bell.value(p):.6f}, "
      f"normalization {bell.normalization:.6f}")
worst = max(abs(bell.value(v.distribution()))
            for v in enumerate_local_vertices(p.alphabets))
print(f"max |B| over the 16 local deterministic vertices: {worst:.6f}  (<= 1)")
