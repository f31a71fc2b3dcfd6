"""How a citation's weight depends on collaboration distance.

Run: python demos/weighting.py
"""
import numpy as np

from xindex.distance import INFINITE, CitationDistanceRecord, YearContext
from xindex.metrics import c_index, h_index, weight, x_index

# The weight saturates: a citation from the far side of the network is worth
# at most one plain citation, one from a co-author is worth nothing.
d_bar = 3.0
for d in [0, 1, 2, 3, 6, 9, 15, INFINITE]:
    print(f"d={d!s:>4}  w={weight(d, d_bar):.4f}")

# Only the ratio d / d_bar matters, so a field with longer average paths is
# judged on its own scale.
print([round(weight(2 * k, k), 4) for k in (2, 3, 4)])

# Two scholars with identical citation counts, cited from different distances.
ctx = {2020: YearContext(2020, d_bar, 1)}
near = [CitationDistanceRecord(f"p{i}", f"q{i}", 2020, 1) for i in range(10)]
far = [CitationDistanceRecord(f"p{i}", f"q{i}", 2020, 6 if i % 3 else INFINITE) for i in range(10)]
for name, recs in (("near", near), ("far", far)):
    ds = [r.distance for r in recs]
    print(f"{name}: tc={len(recs)}  x={x_index(recs, ctx):.2f}  c={c_index(ds)}  h={h_index([1] * 10)}")

grid = np.linspace(0, 5, 11)
print(np.round(1 - np.exp(-grid), 3))
