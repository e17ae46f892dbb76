"""Regenerates the sample feeders and synthetic baseline profiles under data/.

Impedances use a 4.16 kV cable (0.7982 + j0.4463 ohm/mile) on plausible
section lengths, scaled so the 19:00 baseline peak leaves the weakest node
at about 0.958 p.u. With that calibration a flat valley fill that ignores
voltage pushes the far nodes slightly below 0.954 p.u., so the voltage
constraint is active in the shipped scenarios. Run from the repository root.
"""

import json
import math
import random
from pathlib import Path

import numpy as np

R_PER_FT = 0.7982 / 5280.0
X_PER_FT = 0.4463 / 5280.0
SLOTS = 52
SLOT_HOURS = 0.25
POWER_FACTOR = 0.98
V0 = 4160.0


def baseline(peak, trough, end, trough_hour=8.0):
    out = []
    for t in range(SLOTS):
        h = t * SLOT_HOURS
        if h <= trough_hour:
            value = trough + (peak - trough) * (1 + math.cos(math.pi * h / trough_hour)) / 2
        else:
            span = SLOTS * SLOT_HOURS - trough_hour
            value = trough + (end - trough) * (1 - math.cos(math.pi * (h - trough_hour) / span)) / 2
        out.append(round(value, 1))
    return out


def graph_resistance(n, lines, key):
    parent = {l["to"]: l for l in lines}
    depth_sum = {0: 0.0}
    paths = {0: []}
    for node in range(1, n + 1):
        chain = []
        k = node
        while k != 0:
            chain.append(k)
            k = parent[k]["from"]
        paths[node] = list(reversed(chain))
    m = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            shared = set(paths[i]) & set(paths[j])
            m[i - 1, j - 1] = sum(parent[k][key] for k in shared)
    return m


def min_voltage(n, lines, shares, peak_kw):
    r = graph_resistance(n, lines, "r_ohm")
    x = graph_resistance(n, lines, "x_ohm")
    p = np.array(shares) / sum(shares) * peak_kw * 1000.0
    q = p * math.tan(math.acos(POWER_FACTOR))
    drop = 2 * r @ p + 2 * x @ q
    return math.sqrt(V0**2 - drop.max()) / V0


def scaled_lines(n, edges, shares, peak_kw, target):
    # edges: (parent, child, feet)
    def build(scale):
        return [
            {"from": a, "to": b, "r_ohm": round(R_PER_FT * ft * scale, 6), "x_ohm": round(X_PER_FT * ft * scale, 6)}
            for a, b, ft in edges
        ]

    lo, hi = 0.01, 10.0
    for _ in range(60):
        mid = (lo + hi) / 2
        if min_voltage(n, build(mid), shares, peak_kw) > target:
            lo = mid
        else:
            hi = mid
    return build(lo)


def write_feeder(path, name, n, lines, shares, ev_counts):
    doc = {
        "name": name,
        "slack_voltage_kv": V0 / 1000.0,
        "nodes": [{"id": k + 1, "load_share": shares[k], "ev_count": ev_counts[k]} for k in range(n)],
        "lines": lines,
    }
    path.write_text(json.dumps(doc, indent=1) + "\n")


def write_baseline(path, values, note):
    rows = [f"# {note}", "slot,time,kw"]
    for t, v in enumerate(values):
        minutes = (19 * 60 + t * 15) % (24 * 60)
        rows.append(f"{t},{minutes // 60:02d}:{minutes % 60:02d},{v}")
    path.write_text("\n".join(rows) + "\n")


def ieee13(root):
    # 0=650 1=632 2=633 3=634 4=645 5=646 6=671 7=680 8=684 9=611 10=652 11=692 12=675
    edges = [(0, 1, 600), (1, 2, 500), (2, 3, 300), (1, 4, 500), (4, 5, 300), (1, 6, 2000),
             (6, 7, 1500), (6, 8, 300), (8, 9, 300), (8, 10, 1500), (6, 11, 50), (11, 12, 800)]
    shares = [0, 600, 600, 400, 400, 0, 40, 60, 40, 30, 40, 150]
    evs = [0 if k in (1, 6) else 50 for k in range(1, 13)]
    peak = 2000.0
    lines = scaled_lines(12, edges, shares, peak, 0.958)
    write_feeder(root / "feeders/ieee13.feeder", "ieee13", 12, lines, shares, evs)
    write_baseline(root / "baseline/ieee13_baseline.csv", baseline(peak, 600.0, 1600.0),
                   "synthetic overnight feeder demand, 19:00-08:00, 15 min slots")


def ieee123(root):
    rng = random.Random(123)
    n = 122
    edges = [(0, 1, 400)]
    stack = [0, 1]
    for node in range(2, n + 1):
        if len(stack) > 2 and rng.random() < 0.22:
            del stack[rng.randrange(2, len(stack)):]
        edges.append((stack[-1], node, rng.choice([150, 200, 250, 300, 350, 400, 500, 600])))
        stack.append(node)
    # Baseline demand concentrates near the substation; EVs sit everywhere.
    unit = [{"from": a, "to": b, "r_ohm": ft, "x_ohm": ft} for a, b, ft in edges]
    depth = np.diag(graph_resistance(n, unit, "r_ohm"))
    depth = depth / depth.max()
    shares = [0 if k in (1, 6) else round((1 - depth[k - 1]) ** 2 + 0.02, 3) for k in range(1, n + 1)]
    evs = [0 if k in (1, 6) else 5 for k in range(1, n + 1)]
    peak = 2000.0
    lines = scaled_lines(n, edges, shares, peak, 0.958)
    write_feeder(root / "feeders/ieee123.feeder", "ieee123", n, lines, shares, evs)
    write_baseline(root / "baseline/ieee123_baseline.csv", baseline(peak, 600.0, 1600.0),
                   "synthetic overnight feeder demand, 19:00-08:00, 15 min slots")


if __name__ == "__main__":
    root = Path(__file__).resolve().parent.parent / "data"
    ieee13(root)
    ieee123(root)
