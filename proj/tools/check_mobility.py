#!/usr/bin/env python3
"""Recheck an emitted trajectory.csv against the scenario's flight limits.

Reads only the scenario file and the CSV; shares no code with the planner.

    check_mobility.py SCENARIO RUN_DIR [--tol 1e-6]

Exit status 0 when every row passes, 1 otherwise (violations on stderr).
"""
import argparse
import configparser
import csv
import json
import math
import sys
from pathlib import Path


def pair(text):
    x, y = (float(v) for v in text.split(",")[:2])
    return x, y


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("scenario")
    ap.add_argument("run_dir")
    ap.add_argument("--tol", type=float, default=1e-6, help="relative tolerance")
    args = ap.parse_args()

    cfg = configparser.ConfigParser()
    cfg.read(args.scenario)
    t_s = float(cfg["mission"]["slot_s"])
    v_max = float(cfg["uav"]["v_max_mps"])
    start = pair(cfg["mission"]["initial_xy"])
    end = pair(cfg["mission"]["terminal_xy"])

    with open(Path(args.run_dir) / "trajectory.csv", newline="") as f:
        rows = [{k: float(v) for k, v in r.items()} for r in csv.DictReader(f)]
    if not rows:
        print("trajectory.csv has no rows", file=sys.stderr)
        return 1

    model = 1
    summary = Path(args.run_dir) / "summary.json"
    if summary.exists():
        model = json.loads(summary.read_text()).get("model", 1)

    bad = []
    d_max = v_max * t_s
    for a, b in zip(rows, rows[1:]):
        step = math.hypot(b["x"] - a["x"], b["y"] - a["y"])
        if step > d_max * (1 + args.tol):
            bad.append(f"slot {int(a['slot'])}: step {step:.9g} m > {d_max:.9g} m")
    for name, want, row in (("start", start, rows[0]), ("end", end, rows[-1])):
        miss = math.hypot(row["x"] - want[0], row["y"] - want[1])
        if miss > args.tol * max(1.0, math.hypot(*want)):
            bad.append(f"{name} point off by {miss:.3g} m")

    if model == 2:
        a_max = float(cfg["uav"]["a_max_mps2"])
        for a, b in zip(rows, rows[1:]):
            speed = math.hypot(a["vx"], a["vy"])
            acc = math.hypot(a["ax"], a["ay"])
            if speed > v_max * (1 + args.tol):
                bad.append(f"slot {int(a['slot'])}: speed {speed:.9g} > {v_max}")
            if acc > a_max * (1 + args.tol):
                bad.append(f"slot {int(a['slot'])}: acceleration {acc:.9g} > {a_max}")
            for c in ("x", "y"):
                pred = a[c] + a["v" + c] * t_s + 0.5 * a["a" + c] * t_s * t_s
                if abs(pred - b[c]) > args.tol * max(1.0, abs(b[c])) + 1e-9:
                    bad.append(f"slot {int(a['slot'])}: {c} does not follow from v and a")

    for line in bad:
        print(line, file=sys.stderr)
    print(f"{len(rows)} rows, {len(bad)} violations")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
