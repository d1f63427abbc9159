"""Sweep the smoothing radius epsilon for the PR box.

nu_tilde^eps relaxes the target to any distribution within statistical
distance eps.  For the PR box the value interpolates linearly from 2
down to 1, hitting 1 exactly at eps = 1/4 = 1 - omega_pub(CHSH); the
quantum relaxation reaches 1 earlier, at the entangled-value threshold
(1 - sqrt(2)/2)/2 ~ 0.1464.
"""

import numpy as np

from nonsig.bounds import gamma2_tilde_1_eps, nu_tilde_eps
from nonsig.core import pr_box

p = pr_box()
print(f"{'eps':>6}  {'nu_tilde^eps':>12}  {'gamma2^(1,eps)':>14}")
for eps in np.linspace(0.0, 0.3, 7):
    nu = nu_tilde_eps(p, eps).value
    g2 = gamma2_tilde_1_eps(p, eps).value
    print(f"{eps:6.3f}  {nu:12.6f}  {g2:14.6f}")

print("\nthresholds: classical 1/4 = 0.25, "
      f"quantum (1 - sqrt(2)/2)/2 = {(1 - np.sqrt(2) / 2) / 2:.6f}")
