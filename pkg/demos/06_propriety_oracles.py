"""Numerical verification that the improper scale priors give proper posteriors.

Three exhibits:
1. one Gaussian observation is NOT enough: the 1/sigma mass between 1/L and
   L grows as 2 log L without bound;
2. two observations are enough: every cross term of the marginal reduces to
   a bounded closed form, reproduced here by a raw two-dimensional
   quadrature to fourteen digits;
3. one positive count (or one positive duration) is enough for the rate
   families: the marginal equals 1/x1 exactly, confirmed by Monte Carlo
   over the proper prior.
"""

import numpy as np

from mixanchor.oracles import (
    gaussian_pair_closed,
    gaussian_pair_quad,
    marginal_one_obs_mc,
    n1_divergence_probe,
)

print("1) single-observation divergence of the 1/sigma prior")
for L in (10.0, 1e3, 1e6, 1e12):
    print(f"   integral over [1/L, L] with L = {L:>8.0e}: {n1_divergence_probe(L):8.2f}")
print("   grows as 2 log L: no posterior exists for n = 1\n")

print("2) two-observation cross terms: closed form vs raw quadrature")
rng = np.random.default_rng(33)
for case in range(5):
    ti, tj = rng.uniform(0.1, 2.0, 2)
    ai, aj = rng.uniform(-3.0, 3.0, 2)
    dx = rng.uniform(0.1, 10.0) * rng.choice([-1.0, 1.0])
    x1 = rng.uniform(-5.0, 5.0)
    pi_, pj_ = rng.dirichlet([1.0, 1.0])
    closed = gaussian_pair_closed(pi_, pj_, ai, aj, ti, tj, x1, x1 - dx)
    quad = gaussian_pair_quad(pi_, pj_, ai, aj, ti, tj, x1, x1 - dx)
    bound = pi_ * pj_ / abs(dx)
    print(f"   case {case}: closed {closed:.10f}  quad {quad.value:.10f}  "
          f"rel diff {abs(closed - quad.value) / closed:.1e}  (bound {bound:.4f})")
print("   every term is bounded by p_i p_j / |x1 - x2|, so the marginal is finite\n")

print("3) one-observation marginal for rate mixtures equals 1/x1")
for family, x1 in (("poisson", 3.0), ("poisson", 7.0), ("exponential", 0.5)):
    for k in (2, 5):
        est = marginal_one_obs_mc(family, k, x1, n_mc=200_000, seed=5)
        print(f"   {family:>11} k={k} x1={x1}: estimate {est.estimate:.6f} "
              f"(target {1 / x1:.6f}, se {est.std_error:.1e})")
print("   independent of k and of the prior: propriety from a single observation")
