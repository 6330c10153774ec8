#!/usr/bin/env python3
"""Writes the bundled fixtures under data/. Deterministic; rerun after edits."""
import json
import math
from pathlib import Path

import networkx as nx

ROOT = Path(__file__).resolve().parent.parent / "data"


def dump(path, obj):
    path.write_text(json.dumps(obj, indent=2) + "\n")


def bell(h, peak, width):
    return math.exp(-((h - peak) / width) ** 2)


def traffic_shape(h, weekend):
    if weekend:
        return 0.35 + 0.9 * bell(h, 14, 4.5)
    return 0.3 + 0.8 * bell(h, 8, 2.0) + 0.9 * bell(h, 17.5, 2.5)


def load_shape(h, weekend):
    base = 0.55 + 0.3 * bell(h, 19, 3.0) + 0.15 * bell(h, 11, 3.0)
    return base * (0.9 if weekend else 1.0)


def pv_shape(h, cloudy):
    v = max(0.0, math.sin(math.pi * (h - 6) / 13.0)) if 6 <= h <= 19 else 0.0
    return round(v * (0.55 if cloudy else 0.95), 4)


def write_days(path, nodes_tn):
    rows = ["day,hour,series,key,value"]
    for day, weight, weekend in ((1, 261, False), (2, 104, True)):
        rows.append(f"{day},,weight,*,{weight}")
        for h in range(1, 25):
            rows.append(f"{day},{h},traffic_scale,*,{traffic_shape(h, weekend):.4f}")
        for h in range(1, 25):
            rows.append(f"{day},{h},load_scale,*,{load_shape(h, weekend):.4f}")
        for h in range(1, 25):
            rows.append(f"{day},{h},pv,*,{pv_shape(h, weekend)}")
    path.write_text("\n".join(rows) + "\n")


def toy():
    d = ROOT / "toy"
    d.mkdir(parents=True, exist_ok=True)
    dump(d / "transport.json", {
        "nodes": [1, 2, 3, 4],
        "edges": [{"from": 1, "to": 2, "length": 30}, {"from": 2, "to": 3, "length": 45},
                  {"from": 3, "to": 4, "length": 40}],
        "candidates": [1, 2, 3],
    })
    dump(d / "distribution.json", {
        "base_mva": 10, "root": 0, "root_u_sqr": 1.0,
        "nodes": [{"id": 0}, {"id": 1, "p_load_mw": 0.6, "q_load_mvar": 0.2},
                  {"id": 2, "p_load_mw": 0.45, "q_load_mvar": 0.15}],
        "lines": [
            {"from": 0, "to": 1, "r_pu": 0.02, "x_pu": 0.04, "p_max_mw": 2.5, "q_max_mvar": 1.5},
            {"from": 1, "to": 2, "r_pu": 0.03, "x_pu": 0.05, "p_max_mw": 0.55, "q_max_mvar": 0.4,
             "expandable": True, "length_km": 4, "p_expansion_mw": 0.5, "q_expansion_mvar": 0.3},
        ],
    })
    # Station 1 hangs off the constrained feeder end, station 2 off the strong node.
    dump(d / "coupling.json", {"links": [
        {"tn": 1, "dn": 2, "substation_mw": 0.1}, {"tn": 2, "dn": 1, "substation_mw": 0.1},
        {"tn": 3, "dn": 2, "substation_mw": 0.1}, {"tn": 4, "dn": 2}]})

    def od_file(dd):
        return {"ods": [{
            "origin": 1, "destination": 4, "flow": 40,
            "a": [0.06, 0.08], "K": 1.0, "theta0": 0.12, "sigma": [0.02, 0.03],
            "delta_d": dd, "delta_upsilon": [{}, {str(k): 0.5 * v for k, v in dd.items()}],
        }]}

    dump(d / "ods.json", od_file({"1": 0.3, "2": 0.5, "3": 0.4}))
    dump(d / "ods_independent.json", od_file({}))
    write_days(d / "days.csv", [1, 2, 3, 4])
    base = {
        "name": "toy",
        "transport": "transport.json", "distribution": "distribution.json", "coupling": "coupling.json",
        "ods": "ods.json", "days": "days.csv", "periods": 2,
        "scenarios": {"count": 3, "seed": 11},
        "ambiguity": {"eps_mu_relative": 0.1, "eps_v_low": 0.8, "eps_v_high": 1.25},
        "cost": {"fcs": 150000, "cs": 30000, "pv": 900, "ess": 300, "line": 60, "sub": 80,
                 "grid_p": 0.08, "unserved": 0.6, "curtail": 0.02, "shed": 5.0, "interest": 0.06,
                 "period_years": 2},
        "tech": {"range_mi": 100, "z_min": 1, "z_max": 2, "p_cs_kw": 120, "ed_kwh_per_mi": 0.24},
        "model": {"pv": False, "ess": False},
        "solver": {"gap_tol": 1e-6, "max_iter": 100},
    }
    dump(d / "config.json", base)
    dump(d / "config_independent.json", {**base, "name": "toy-independent", "ods": "ods_independent.json"})
    dump(d / "config_der.json", {**base, "name": "toy-der", "model": {"pv": True, "ess": True},
                                 "tech": {**base["tech"], "pv_max_mw": 0.3, "ess_max_mwh": 0.4}})


SIOUX_EDGES = [
    (1, 2, 6), (1, 3, 4), (2, 6, 5), (3, 4, 4), (3, 12, 4), (4, 5, 2), (4, 11, 6), (5, 6, 4), (5, 9, 5),
    (6, 8, 2), (7, 8, 3), (7, 18, 2), (8, 9, 10), (8, 16, 5), (9, 10, 3), (10, 11, 5), (10, 15, 6),
    (10, 16, 4), (10, 17, 8), (11, 12, 6), (11, 14, 4), (12, 13, 3), (13, 24, 4), (14, 15, 5), (14, 23, 4),
    (15, 19, 3), (15, 22, 3), (16, 17, 2), (16, 18, 3), (17, 19, 2), (18, 20, 4), (19, 20, 4), (20, 21, 6),
    (20, 22, 5), (21, 22, 2), (21, 24, 3), (22, 23, 4), (23, 24, 2),
]
MI_PER_UNIT = 6.0


def sioux():
    d = ROOT / "sioux24"
    d.mkdir(parents=True, exist_ok=True)
    dump(d / "transport.json", {
        "nodes": list(range(1, 25)),
        "edges": [{"from": a, "to": b, "length": u * MI_PER_UNIT} for a, b, u in SIOUX_EDGES],
        # Ten sites keep the decomposition within budget on one core; {3, 6, 11, 21} alone covers every pair.
        "candidates": [1, 3, 6, 8, 11, 12, 16, 18, 21, 24],
    })
    # 14-node radial feeder; root 0 at the substation.
    parents = {1: 0, 2: 1, 3: 2, 4: 3, 5: 1, 6: 5, 7: 6, 8: 1, 9: 8, 10: 9, 11: 2, 12: 11, 13: 8}
    nodes = [{"id": 0}]
    for n in range(1, 14):
        nodes.append({"id": n, "p_load_mw": round(0.25 + 0.05 * (n % 4), 3),
                      "q_load_mvar": round(0.08 + 0.02 * (n % 3), 3)})
    lines = []
    for n, p in parents.items():
        depth = 0
        q = n
        while q != 0:
            q = parents[q]
            depth += 1
        line = {"from": p, "to": n, "r_pu": 0.01 + 0.004 * depth, "x_pu": 0.02 + 0.006 * depth,
                "p_max_mw": round(3.2 - 0.6 * depth, 2), "q_max_mvar": round(2.0 - 0.35 * depth, 2)}
        if depth >= 4:
            line.update({"expandable": True, "length_km": 3 + depth, "p_expansion_mw": 0.6,
                         "q_expansion_mvar": 0.4})
        lines.append(line)
    dump(d / "distribution.json", {"base_mva": 10, "root": 0, "root_u_sqr": 1.0, "nodes": nodes,
                                   "lines": lines})
    dump(d / "coupling.json", {"links": [{"tn": n, "dn": 1 + (n - 1) % 13, "substation_mw": 0.1}
                                         for n in range(1, 25)]})

    g = nx.Graph()
    for a, b, u in SIOUX_EDGES:
        g.add_edge(a, b, weight=u * MI_PER_UNIT)
    pairs = [(1, 20), (2, 24), (7, 13), (3, 19), (6, 23), (12, 18)]
    ods = []
    for i, (o, t) in enumerate(pairs):
        path = nx.shortest_path(g, o, t, weight="weight")
        inner = path[1:-1]
        dd = {str(n): round(0.1 + 0.05 * ((n + i) % 3), 2) for n in inner}
        ods.append({
            "origin": o, "destination": t, "flow": 30 + 5 * (i % 3),
            "a": [0.05 + 0.01 * (i % 2), 0.07], "K": 1.0, "theta0": 0.1 + 0.01 * i, "sigma": [0.02, 0.03],
            "delta_d": dd, "delta_upsilon": [{}, {k: 0.5 * v for k, v in dd.items()}],
        })
    dump(d / "ods.json", {"ods": ods})
    # Same pairs with doubled incentive factors.
    double = json.loads(json.dumps(ods))
    for o in double:
        o["delta_d"] = {k: 2 * v for k, v in o["delta_d"].items()}
        o["delta_upsilon"] = [{k: 2 * v for k, v in m.items()} for m in o["delta_upsilon"]]
    dump(d / "ods_if2.json", {"ods": double})
    write_days(d / "days.csv", list(range(1, 25)))
    base = {
        "name": "sioux24",
        "transport": "transport.json", "distribution": "distribution.json", "coupling": "coupling.json",
        "ods": "ods.json", "days": "days.csv", "periods": 2,
        "scenarios": {"count": 30, "seed": 5},
        "ambiguity": {"eps_mu_relative": 0.1, "eps_v_low": 0.8, "eps_v_high": 1.25},
        "cost": {"fcs": 150000, "cs": 30000, "pv": 900, "ess": 300, "line": 60, "sub": 80,
                 "grid_p": 0.08, "unserved": 0.6, "curtail": 0.02, "shed": 5.0, "interest": 0.06,
                 "period_years": 2},
        "tech": {"range_mi": 150, "z_min": 1, "z_max": 4, "p_cs_kw": 120, "ed_kwh_per_mi": 0.24,
                 "pv_max_mw": 0.5, "ess_max_mwh": 0.5},
        "filter": {"recharge_threshold": 0.2},
        "solver": {"gap_tol": 1e-4, "max_iter": 200},
    }
    dump(d / "config.json", base)
    dump(d / "config_if2.json", {**base, "name": "sioux24-if2", "ods": "ods_if2.json"})


if __name__ == "__main__":
    toy()
    sioux()
