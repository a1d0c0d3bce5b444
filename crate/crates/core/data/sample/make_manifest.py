"""Recomputes manifest.json from nodes.tsv and edges.tsv.

Deliberately independent of the Rust loader: plain line splitting, set
arithmetic and dictionary joins.
"""
import json
import os
from collections import Counter

HERE = os.path.dirname(os.path.abspath(__file__))


def rows(name):
    with open(os.path.join(HERE, name), encoding="utf-8") as f:
        lines = f.read().splitlines()
    return [line.split("\t") for line in lines[1:] if line.strip()]


nodes = {(r[0], r[1]) for r in rows("nodes.tsv")}
edges = set()
for s_label, s_name, ty, d_label, d_name in rows("edges.tsv"):
    if (s_label, s_name) in nodes and (d_label, d_name) in nodes:
        edges.add((s_label, s_name, ty, d_label, d_name))

out = {}
for s_label, s_name, ty, d_label, d_name in edges:
    out.setdefault((s_label, s_name, ty), []).append((d_label, d_name))

city_country = {s[1]: d[0][1] for s, d in out.items() if s[2] == "inCountry"}
gallery_city = {s[1]: d[0][1] for s, d in out.items() if s[2] == "inCity"}

displaced = []
skipped = 0
for label, name in sorted(nodes):
    if label != "Artwork":
        continue
    completed = None
    for d_label, d_name in out.get((label, name, "completedIn"), []):
        completed = d_name if d_label == "Country" else city_country.get(d_name)
    stored = None
    for _, gallery in out.get((label, name, "locatedInGallery"), []):
        stored = city_country.get(gallery_city.get(gallery))
    if completed is None or stored is None:
        skipped += 1
    elif completed != stored:
        displaced.append([name, completed, stored])

in_country = {}
for label, name in nodes:
    if label != "Artwork":
        continue
    for _, gallery in out.get((label, name, "locatedInGallery"), []):
        country = city_country[gallery_city[gallery]]
        in_country.setdefault(country, []).append(name)

manifest = {
    "nodes_by_label": dict(sorted(Counter(l for l, _ in nodes).items())),
    "edges_by_type": dict(sorted(Counter(e[2] for e in edges).items())),
    "total_nodes": len(nodes),
    "total_edges": len(edges),
    "displaced": sorted(displaced),
    "displaced_skipped": skipped,
    "artworks_by_storage_country": {k: sorted(v) for k, v in sorted(in_country.items())},
}
with open(os.path.join(HERE, "manifest.json"), "w", encoding="utf-8") as f:
    json.dump(manifest, f, indent=2, ensure_ascii=False)
    f.write("\n")
