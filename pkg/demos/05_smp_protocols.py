"""Monte-Carlo runs of the three simultaneous-messages protocols.

Both parties sample from the signed components of a minimal affine
model of the PR box (mass 2) and the referee renormalizes the signed
estimates into a distribution with a dummy outcome.  The quantum
variant is simulated through the closed-form swap-test law instead of
state vectors.  Plans here use reduced trial counts for a quick run;
the full Hoeffding-planned sizes are printed for reference.
"""

from nonsig.bounds import nu_tilde
from nonsig.core import pr_box, to_correlation_rep
from nonsig.simulate import (
    boolean_plan,
    classical_plan,
    quantum_plan,
    run_smp_boolean,
    run_smp_classical,
    run_smp_quantum_sim,
)

p = pr_box()
model = nu_tilde(p).primal_certificate
lam = model.mass
print(f"affine model of the PR box: {len(model.components)} local vertices, "
      f"mass Lambda = {lam:.4f}")

full = classical_plan(lam, 0.1, p.alphabets)
print(f"\nclassical plan (delta=0.1): T = {full.T}, beta = {full.beta:.5f}")
plan = classical_plan(lam, 0.1, p.alphabets, T=40_000)
out = run_smp_classical(model, p, plan, seed=0)
print(f"reduced run (T={plan.T}): empirical distance {out.distance:.4f} "
      f"(budget eps + delta = 0.1)")

qfull = quantum_plan(lam, 0.2, p.alphabets)
print(f"\nquantum plan (delta=0.2): T = {qfull.T}, L = {qfull.L}")
qplan = quantum_plan(lam, 0.2, p.alphabets, T=20_000, L=4_000)
qout = run_smp_quantum_sim(model, p, qplan, seed=0)
print(f"reduced run (T={qplan.T}, L={qplan.L}): distance {qout.distance:.4f}, "
      f"pool ok: {qout.extras['pool_ok']}")

C = to_correlation_rep(p).C
bplan = boolean_plan(lam, 0.05)
bres = run_smp_boolean(C, model, bplan, seed=0)
print(f"\nboolean sign protocol (delta=0.05): T' = {bplan.T}, "
      f"max per-input error rate {bres['max_error_rate']:.4f}")
