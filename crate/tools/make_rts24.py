#!/usr/bin/env python3
"""Generate cases/rts24.case, a 24-bus single-area RTS-96 reconstruction.

Network topology, reactances, ratings, unit placement, bus load shares, and
the winter-weekday hourly shape follow the published RTS-96 tables. Cost and
commitment parameters (energy, no-load, startup, minimum times) are filled
with representative values by unit class, since no single published table
fixes them. Peak system load is scaled to 2,281 MW.
"""

import json
import os

PEAK_MW = 2281.0

# Winter weekday hourly load, percent of daily peak.
HOURLY_SHAPE = [
    67, 63, 60, 59, 59, 60, 74, 86, 95, 96, 96, 95,
    95, 95, 93, 94, 99, 100, 100, 96, 91, 83, 73, 63,
]

# Bus load share, percent of system load.
BUS_LOAD_PCT = {
    1: 3.8, 2: 3.4, 3: 6.3, 4: 2.6, 5: 2.5, 6: 4.8, 7: 4.4, 8: 6.0,
    9: 6.1, 10: 6.8, 13: 9.3, 14: 6.8, 15: 11.1, 16: 3.5, 18: 11.7,
    19: 6.4, 20: 4.5,
}

# (from, to, reactance pu on 100 MVA, rating class)
# Classes: L138 (175/208 MW), L230 (500/625 MW), XFMR (400/600 MW).
BRANCHES = [
    (1, 2, 0.014, "L138"),
    (1, 3, 0.211, "L138"),
    (1, 5, 0.085, "L138"),
    (2, 4, 0.127, "L138"),
    (2, 6, 0.192, "L138"),
    (3, 9, 0.119, "L138"),
    (3, 24, 0.084, "XFMR"),
    (4, 9, 0.104, "L138"),
    (5, 10, 0.088, "L138"),
    (6, 10, 0.061, "L138"),
    (7, 8, 0.061, "L138"),
    (8, 9, 0.165, "L138"),
    (8, 10, 0.165, "L138"),
    (9, 11, 0.084, "XFMR"),
    (9, 12, 0.084, "XFMR"),
    (10, 11, 0.084, "XFMR"),
    (10, 12, 0.084, "XFMR"),
    (11, 13, 0.048, "L230"),
    (11, 14, 0.042, "L230"),
    (12, 13, 0.048, "L230"),
    (12, 23, 0.097, "L230"),
    (13, 23, 0.087, "L230"),
    (14, 16, 0.059, "L230"),
    (15, 16, 0.017, "L230"),
    (15, 21, 0.049, "L230"),
    (15, 21, 0.049, "L230"),
    (15, 24, 0.052, "L230"),
    (16, 17, 0.026, "L230"),
    (16, 19, 0.023, "L230"),
    (17, 18, 0.014, "L230"),
    (17, 22, 0.105, "L230"),
    (18, 21, 0.026, "L230"),
    (18, 21, 0.026, "L230"),
    (19, 20, 0.040, "L230"),
    (19, 20, 0.040, "L230"),
    (20, 23, 0.022, "L230"),
    (20, 23, 0.022, "L230"),
    (21, 22, 0.068, "L230"),
]

RATINGS = {"L138": (175.0, 208.0), "L230": (500.0, 625.0), "XFMR": (400.0, 600.0)}

# Unit class parameters:
#   p_min, p_max, energy $/MWh, no-load $/h, startup $, ramp MW/min,
#   min up h, min down h
UNIT_CLASSES = {
    "U12": (2.4, 12.0, 26.0, 20.0, 60.0, 1.0, 4, 2),
    "U20": (4.0, 20.0, 37.5, 25.0, 50.0, 3.0, 1, 1),
    "U50": (0.0, 50.0, 0.0, 0.0, 0.0, 10.0, 1, 1),
    "U76": (15.2, 76.0, 13.5, 120.0, 500.0, 2.0, 8, 4),
    "U100": (25.0, 100.0, 18.0, 200.0, 600.0, 7.0, 8, 8),
    "U155": (54.25, 155.0, 10.9, 300.0, 900.0, 3.0, 8, 8),
    "U197": (68.95, 197.0, 23.0, 400.0, 1200.0, 3.0, 12, 10),
    "U350": (140.0, 350.0, 10.8, 500.0, 2000.0, 4.0, 24, 48),
    "U400": (100.0, 400.0, 7.5, 250.0, 2500.0, 20.0, 24, 24),
    "SYNC": (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1, 1),
}

# (bus, unit class) in RTS id order; the bus-14 entry is the synchronous
# condenser, kept so the unit count and outage probabilities match.
UNITS = (
    [(1, "U20")] * 2 + [(1, "U76")] * 2
    + [(2, "U20")] * 2 + [(2, "U76")] * 2
    + [(7, "U100")] * 3
    + [(13, "U197")] * 3
    + [(14, "SYNC")]
    + [(15, "U12")] * 5 + [(15, "U155")]
    + [(16, "U155")]
    + [(18, "U400")]
    + [(21, "U400")]
    + [(22, "U50")] * 6
    + [(23, "U155")] * 2 + [(23, "U350")]
)


def build_generators():
    gens = []
    for gid, (bus, cls) in enumerate(UNITS, start=1):
        p_min, p_max, energy, no_load, startup, rpm, up, dn = UNIT_CLASSES[cls]
        ramp_hourly = min(60.0 * rpm, p_max) if p_max > 0 else 0.0
        ramp_10 = min(10.0 * rpm, p_max) if p_max > 0 else 0.0
        ramp_su = max(p_min, ramp_hourly)
        gens.append({
            "id": gid,
            "bus": bus,
            "energy_cost": energy,
            "no_load_cost": no_load,
            "startup_cost": startup,
            "p_min": p_min,
            "p_max": p_max,
            "ramp_hourly": ramp_hourly,
            "ramp_startup": ramp_su,
            "ramp_shutdown": ramp_su,
            "ramp_10min": ramp_10,
            "min_up": up,
            "min_down": dn,
            "initial_on": False,
        })
    return gens


def build_lines():
    lines = []
    for lid, (f, t, x, cls) in enumerate(BRANCHES, start=1):
        normal, emergency = RATINGS[cls]
        lines.append({
            "id": lid,
            "from": f,
            "to": t,
            "susceptance": round(100.0 / x, 6),
            "rate_normal": normal,
            "rate_emergency": emergency,
        })
    return lines


def build_load():
    load = {}
    for bus, pct in sorted(BUS_LOAD_PCT.items()):
        series = [round(PEAK_MW * pct / 100.0 * h / 100.0, 4) for h in HOURLY_SHAPE]
        load[str(bus)] = series
    return load


def main():
    case = {
        "name": "rts24",
        "reference_bus": 13,
        "horizon": 24,
        "buses": [{"id": i, "name": f"bus{i}"} for i in range(1, 25)],
        "generators": build_generators(),
        "lines": build_lines(),
        "load": build_load(),
        "cdr": {"cap_fraction": 0.3, "default_penalty": 100.0},
    }
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    out = os.path.join(root, "cases", "rts24.case")
    os.makedirs(os.path.dirname(out), exist_ok=True)
    with open(out, "w") as fh:
        json.dump(case, fh, indent=1)
        fh.write("\n")
    total = sum(g["p_max"] for g in case["generators"])
    peak = max(
        sum(series[t] for series in case["load"].values())
        for t in range(24)
    )
    print(f"wrote {out}: {len(case['buses'])} buses, "
          f"{len(case['generators'])} units ({total:.0f} MW), "
          f"{len(case['lines'])} branches, peak {peak:.1f} MW")


if __name__ == "__main__":
    main()
