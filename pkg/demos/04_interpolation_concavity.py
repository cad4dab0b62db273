"""Concavity of the entropy of the interpolation W_t = sqrt(t) X + sqrt(1-t) Z.

The scaling identity h(W_t) = h(X + sqrt(1/t - 1) Z) + log(t)/2 turns
every W_t quantity into a flow quantity, so the checks reuse the same
oracle.  h(W_t) is concave for every mixture tried; J(W_t), by contrast,
bends both ways for the bimodal example, mirroring the 1/J behavior
along the flow.
"""

import numpy as np

from heatcalc import BIMODAL_MIXTURE, GaussianMixture, wt_checks

grid = list(np.linspace(0.05, 0.95, 31))

print("Standard normal input: W_t is N(0,1) for every t, so h(W_t) is flat")
rep = wt_checks(GaussianMixture.single(0, 1), grid)
print(f"  h(W_t) spread: {max(r.hW for r in rep.rows) - min(r.hW for r in rep.rows):.2e}")
print(f"  concavity: {rep.concavity_ok()}, inequality margin >= 0: {rep.txz_ok()}")
print()

print("Wide Gaussian N(0,4): J(W_t) = 1/(1 + 3t), convex in t")
rep4 = wt_checks(GaussianMixture.single(0, 4), grid)
worst = max(abs(r.JW - 1 / (1 + 3 * r.t)) for r in rep4.rows)
print(f"  |J(W_t) - closed form| worst: {worst:.2e}")
print(f"  concavity: {rep4.concavity_ok()}, inequality: {rep4.txz_ok()}")
print()

print("Bimodal mixture: h(W_t) still concave, but J(W_t) changes curvature")
repb = wt_checks(BIMODAL_MIXTURE, grid)
print(f"  concavity: {repb.concavity_ok()}, inequality: {repb.txz_ok()}")
print(f"  J(W_t) curvature takes both signs: {repb.jw_dd_has_both_signs()}")
print()
print("    t        h(W_t)      J(W_t)     hW_dd       JW_dd")
for row in repb.rows[::3]:
    print(
        f"{row.t:8.3f} {row.hW:11.5f} {row.JW:11.6f} {row.hW_dd:+.3e} {row.JW_dd:+.3e}"
    )
