#!/usr/bin/env python3
"""Generates data/heavytail_145.scenario.

145 synthetic components whose idle powers are uniform within each
cumulative-share bucket, so that the cumulative distribution table is
reproduced exactly. Total power is 1000 mW; values are synthetic.
"""

import json
import sys

# (count, share of total in percent, category cycle, decomposition)
BUCKETS = [
    (82, 0.017927),
    (36, 0.22222),
    (11, 0.72909),
    (11, 2.34545),
    (3, 6.10333),
    (2, 19.2),
]

CATEGORIES = ["Sensor", "Compute", "Memory", "Storage", "Interconnect", "Output", "SocTopLevel", "Radio"]

DECOMPOSITION = {
    "Sensor": {"digital_dynamic": 0.3, "digital_leakage": 0.2, "analog": 0.5, "rf": 0.0},
    "Compute": {"digital_dynamic": 0.7, "digital_leakage": 0.3, "analog": 0.0, "rf": 0.0},
    "Memory": {"digital_dynamic": 0.4, "digital_leakage": 0.2, "analog": 0.4, "rf": 0.0},
    "Storage": {"digital_dynamic": 0.4, "digital_leakage": 0.3, "analog": 0.3, "rf": 0.0},
    "Interconnect": {"digital_dynamic": 0.7, "digital_leakage": 0.3, "analog": 0.0, "rf": 0.0},
    "Output": {"digital_dynamic": 0.1, "digital_leakage": 0.0, "analog": 0.9, "rf": 0.0},
    "SocTopLevel": {"digital_dynamic": 0.5, "digital_leakage": 0.3, "analog": 0.2, "rf": 0.0},
    "Radio": {"digital_dynamic": 0.15, "digital_leakage": 0.05, "analog": 0.2, "rf": 0.6},
}

TOTAL_MW = 1000.0


def main(out_path):
    devices = []
    index = 0
    for bucket, (count, share) in enumerate(BUCKETS):
        for _ in range(count):
            category = CATEGORIES[index % len(CATEGORIES)]
            devices.append({
                "id": f"c{index + 1:03d}_b{bucket}",
                "category": category,
                "states": [{"name": "idle", "power_mw": round(TOTAL_MW * share / 100.0, 9)}],
                "rail": "battery",
                "power_decomposition": DECOMPOSITION[category],
            })
            index += 1
    scenario = {
        "devices": devices,
        "rails": [],
        "sensors": [],
        "primitives": [],
        "placement": {},
        "duration_s": 10,
        "battery": {"capacity_wh": 3, "target_hours": 15},
    }
    with open(out_path, "w") as f:
        json.dump(scenario, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/heavytail_145.scenario")
