"""
Euler with strong friction relaxes to porous-medium flow
========================================================

The relative energy between the damped Euler solution and the diffusion
limit shrinks as the relaxation time eps does.
"""

import numpy as np

from modeconv.relaxation import EnergyLaw, ExperimentConfig, lemma_constants, rel_entropy, relaxation_experiment

law = EnergyLaw(k=1.0, gamma=2.0)

# the relative entropy is quadratic near rho_bar and grows like rho^gamma far out
c = lemma_constants(law, 0.5, 2.0)
print(f"R = {c.R}, C1 = {c.C1:.8f}, C2 = {c.C2:.8f}")
rho = np.array([0.0, 1.0, 2.5, 10.0])
print("h(rho | 1):", rel_entropy(rho, 1.0, law))

# a small run; the command-line tool runs the full-size one
cfg = ExperimentConfig(J=64, T_final=0.1, eps_list=(1 / 4, 1 / 16, 1 / 64), samples=20)
rep = relaxation_experiment(cfg)
for run in rep.runs:
    last = run.splits[-1]
    print(f"eps={run.eps:<8g} sup psi={run.sup_psi:.3e}  trimmed_l2(T)={last.trimmed_l2:.3e}  drift={run.mass_drift:.1e}")
