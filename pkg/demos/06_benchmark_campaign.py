"""
Benchmark campaigns
===================

Aggregate iterations-to-threshold over seeds for all three algorithms
on one instance family. Full sweeps live behind ``apadmm bench``; this
runs a reduced cut (5 seeds, small cap) in a few seconds.
"""

import sys

from apadmm import CampaignCell, campaign_csv, run_campaign

cells = [
    CampaignCell(algorithm=alg, dim=30, num_components=4, delay_bound=4,
                 rows=12, nonzero_prob=0.15, l1_weight=0.0)
    for alg in ("async_padmm", "sync_padmm", "sync_admm")
]


def progress(cell, seed, out):
    sys.stderr.write("  %s seed %d: %d iters\n" % (
        cell.algorithm, seed, out.iterations))


rows = run_campaign(cells, seeds=5, max_iters=10000, epsilon=1e-3,
                    progress=progress)
print()
print(campaign_csv(rows))
means = {r["algorithm"]: r["mean_iters"] for r in rows}
print("ordering: async %.0f < sync padmm %.0f < sync admm %.0f" % (
    means["async_padmm"], means["sync_padmm"], means["sync_admm"]))
