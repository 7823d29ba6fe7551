"""Degenerate coefficients: compensated flux transfer vs strong-form exchange.

With c1 = c2 the interface is invisible to the exact solution, yet the
strong-form baseline still differentiates net1 at the interface to build
net2's flux target, so early-iteration gradient noise is recycled as data.
The compensated solver never evaluates a network gradient on the interface;
its flux information rides inside an integral over the whole subdomain.
This scaled-down run already shows the gap opening after a few iterations.
"""

from dnlearn.deepddm import DdmConfig, run_deepddm
from dnlearn.dn_solver import DnConfig, run_dnla
from dnlearn.geometry import SampleCounts
from dnlearn.problems import example_circle

problem = example_circle(1.0, 1.0)
counts = SampleCounts(400, 400, 100, 100, 100)
shared = dict(rho=0.5, max_outer=4, epochs_dirichlet=300, epochs_neumann=200,
              stop_tol=0.0, seed=0, hidden_layers=2, width=16)

print("compensated solver (dnla_pinns):")
dnla = run_dnla(problem, DnConfig(**shared), counts)
for rec in dnla.records:
    print(f"  iter {rec.iteration}: relative_l2 {rec.relative_l2:.4f}")

print("strong-form baseline (deepddm):")
ddm = run_deepddm(problem, DdmConfig(**shared), counts)
for rec in ddm.records:
    print(f"  iter {rec.iteration}: relative_l2 {rec.relative_l2:.4f}  "
          f"flux defect {rec.term_losses['flux_error']:.3f}")

print()
a = dnla.records[-1].relative_l2
b = ddm.records[-1].relative_l2
print(f"final relative_l2: compensated {a:.4f} vs baseline {b:.4f}")
print("The baseline's flux defect column shows the transmission error that")
print("its own training loop keeps feeding back into the Neumann subproblem.")
