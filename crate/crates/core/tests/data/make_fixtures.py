"""Regenerates fixtures.json: weighted Max-Cut graphs that embed exactly.

Points are placed so every pair is either an edge (distance in [0.7, 1])
or a far non-edge (distance >= 1.66); edge weights are (1/r)^6, so the
graph is realisable by construction and the unwanted couplings stay under
5% of the weakest edge.
"""
import itertools
import json
import math
import random

EDGE_MIN, EDGE_MAX, FAR = 0.7, 1.0, 1.66


def place(n, max_deg, rng, tries=200000):
    pts = [(0.0, 0.0)]
    for _ in range(tries):
        if len(pts) == n:
            break
        ax, ay = rng.choice(pts)
        ang = rng.uniform(0, 2 * math.pi)
        r = rng.uniform(EDGE_MIN, EDGE_MAX)
        p = (ax + r * math.cos(ang), ay + r * math.sin(ang))
        ds = [math.dist(p, q) for q in pts]
        if any(d < EDGE_MIN or EDGE_MAX < d < FAR for d in ds):
            continue
        deg = [sum(1 for k, q in enumerate(pts) if k != j and math.dist(pts[j], q) <= EDGE_MAX) for j in range(len(pts))]
        nbrs = [j for j, d in enumerate(ds) if d <= EDGE_MAX]
        if len(nbrs) > max_deg or any(deg[j] + 1 > max_deg for j in nbrs):
            continue
        pts.append(p)
    return pts if len(pts) == n else None


def graph(name, n, max_deg, min_edges, rng):
    while True:
        pts = place(n, max_deg, rng)
        if pts is None:
            continue
        edges = []
        for a, b in itertools.combinations(range(n), 2):
            d = math.dist(pts[a], pts[b])
            if d <= EDGE_MAX:
                edges.append([a, b, round(d ** -6, 6)])
        if len(edges) >= min_edges:
            return {"kind": "maxcut", "n": n, "edges": edges, "name": name}


def main():
    rng = random.Random(20240611)
    out = {
        "weighted_n5": [graph(f"w5_{i}", 5, 3, 5, rng) for i in range(10)],
        "weighted_n8": graph("w8", 8, 4, 9, rng),
        "weighted_n12": graph("w12", 12, 5, 15, rng),
    }
    with open("fixtures.json", "w") as f:
        json.dump(out, f, indent=1)


if __name__ == "__main__":
    main()
