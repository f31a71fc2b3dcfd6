"""Yearly collaboration snapshots and the average citation distance of a synthetic corpus.

Run: python demos/collaboration_network.py
"""
from xindex.collabnet import build_window_graph, graph_stats
from xindex.corpus import build_index
from xindex.pipeline import compute_distances
from xindex.synth import SynthConfig, generate_corpus

config = SynthConfig(seed=11)
index = build_index(generate_corpus(config))
print(len(index.papers), "papers,", index.citation_count(), "citations,", len(index.author_papers), "authors")

# Each year's network holds co-authorships from the five years up to it.
print("year  nodes  edges   lcc  <k>    <l>")
for year in index.years:
    net = build_window_graph(index, year)
    s = graph_stats(net, sample_pairs=2000, seed=year)
    path = f"{s.avg_shortest_path:.2f}" if s.avg_shortest_path else "  -"
    print(f"{year}  {s.n_nodes:5d}  {s.n_edges:5d}  {s.lcc_size:4d}  {s.avg_degree:5.2f}  {path}")

# The normaliser for each citing year: mean distance over pairs inside the LCC.
table, contexts = compute_distances(index, index.citation_years)
for year, ctx in sorted(contexts.items()):
    print(year, f"d_bar={ctx.d_bar:.3f}", f"pairs={ctx.valid_pair_count}")
print("share of infinite distances:", round(float(table.is_infinite().mean()), 4))
