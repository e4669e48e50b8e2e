"""Label switching and its removal on a three-component mixture.

The general sampler's independence refresh of the location angles hops
between the k! symmetric posterior modes, so raw component chains are
exchangeable and useless; relabelling each draw toward the
maximum-a-posteriori draw (or clustering the pooled draws) recovers
component-specific estimates.
"""

import numpy as np

from mixanchor.likelihood import Dataset
from mixanchor.postprocess import (
    detect_switching,
    draws_from_chain,
    find_map,
    kmeans_summary,
    relabel_map,
)
from mixanchor.priors import PriorSpec
from mixanchor.sampler import RunConfig, mwg_gaussian

rng = np.random.default_rng(5)
comp = rng.choice(3, size=50, p=[0.27, 0.4, 0.33])
x = rng.normal(np.array([-4.5, 10.0, 3.0])[comp], 1.0)
print("truth: 0.27 N(-4.5, 1) + 0.4 N(10, 1) + 0.33 N(3, 1), n = 50")

config = RunConfig(iterations=30000, burn_in=2000, seed=2)
result = mwg_gaussian(Dataset(x), 3, PriorSpec(), config)
chain = result.chains[0]

weight_means = [chain.post_burn(f"p{i+1}").mean() for i in range(3)]
print(f"\npre-relabel weight means: {np.round(weight_means, 3)}")
print("(all close to 1/3: the chain hops freely between the 6 symmetric modes)")

draws = draws_from_chain(chain)
map_params, map_index = find_map(draws)
relabelled, trace = relabel_map(draws, map_params)
report = detect_switching(trace)
print(f"\nswitch detector: {report.distinct_permutations} distinct permutations, "
      f"{report.transitions} transitions, longest constant run {report.longest_constant_run}")

order = np.argsort(np.median(relabelled.locs, axis=0))
print("\nafter MAP relabelling (sorted by location):")
print(f"  location medians: {np.round(np.median(relabelled.locs, axis=0)[order], 3)}")
print(f"  scale medians:    {np.round(np.median(relabelled.scales, axis=0)[order], 3)}")
print(f"  weight medians:   {np.round(np.median(relabelled.weights, axis=0)[order], 3)}")

km = kmeans_summary(draws, 3, seed=1)
print("\nk-means over the pooled (loc, scale, weight) points:")
print(f"  columns: {km['columns']}")
print(f"  within-cluster medians:\n{np.round(km['medians'], 3)}")
print("\nboth summaries agree: well separated posterior modes")
