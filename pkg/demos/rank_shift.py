"""Who moves up when citations are weighted by distance?

Hyperprolific archetypes publish a lot and are cited locally; far-reaching
archetypes publish little but are cited from other communities.  Ranking by
x instead of np should push the first group down and the second up.

Run: python demos/rank_shift.py
"""
import numpy as np

from xindex.analysis import wilcoxon_signed_rank
from xindex.corpus import build_index
from xindex.pipeline import compute_distances, rank_deltas
from xindex.synth import SynthConfig, generate_corpus, hp_author_ids, ta_author_ids

config = SynthConfig(seed=0)
index = build_index(generate_corpus(config))
table, contexts = compute_distances(index, index.citation_years)
year = config.end_year

for label, ids, alternative in (("far-reaching", ta_author_ids(config), "less"),
                                ("hyperprolific", hp_author_ids(config), "greater")):
    for baseline in ("np", "tc", "h", "c"):
        rows = rank_deltas(index, table, contexts, [(a, year) for a in ids], "x", baseline)
        deltas = np.array([r[4] for r in rows])
        res = wilcoxon_signed_rank(deltas, alternative)
        print(f"{label:13s} x vs {baseline:2s}: median delta {np.median(deltas):+7.1f}  "
              f"W+={res.statistic:4.0f}  p({alternative})={res.p_value:.4f}")
