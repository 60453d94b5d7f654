"""
Finding hierarchical stars
==========================

Plant disjoint ``(k1, k2)`` hierarchical stars, hide them among extra
edges, and recover them with the greedy extraction.  Then run it on a
power-law graph.
"""

from metastable_epi import extract_disjoint_hstars, generate_graph, plant_hstar_graph
from metastable_epi.structures import recall

# four (3, 4)-stars with shuffled labels and a bridge between two centers
g, planted = plant_hstar_graph(4, 3, 4, extra_edges=[(0, 16)], seed=7)
found = extract_disjoint_hstars(g, 3, 4)
print(f"planted {len(planted)}, found {len(found)}, recall {recall(planted, found):.0%}")
print("first star:", found[0].to_dict())

# on a configuration-model graph the high-degree vertices serve as centers
_, _, g = generate_graph(20_000, 2.5, seed=3)
stars = extract_disjoint_hstars(g, 4, 4, max_count=10)
print(f"{len(stars)} disjoint (4,4)-stars; center degrees", [int(g.degree(hs.center)) for hs in stars])
