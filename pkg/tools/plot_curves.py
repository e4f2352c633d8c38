#!/usr/bin/env python3
"""Render rate-vs-blocklength figures from `vlsf curve` / `vlsf bec-rlfc` CSV.

Repo tooling, not part of the package: reads only the documented column
names, one line per (source, m) series.

    python3 tools/plot_curves.py curve.csv -o curve.png
"""

import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

BASELINE_STYLES = {
    "polyanskiy": dict(color="black", linestyle="--"),
    "devassy": dict(color="tab:green", linestyle="-."),
    "strlfc-zero-error": dict(color="tab:purple", linestyle=":"),
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv_path")
    parser.add_argument("-o", "--out", default="curves.png")
    parser.add_argument("--title", default=None)
    args = parser.parse_args()

    series = defaultdict(list)
    channel = ""
    with open(args.csv_path) as fh:
        for row in csv.DictReader(fh):
            if not row["N_star"]:
                continue  # infeasible rows keep their place but have no point
            channel = f"{row['channel']}({row['param']})"
            key = (row["source"], int(row["m"]))
            series[key].append((float(row["N_star"]), float(row["rate"])))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for (source, m), points in sorted(series.items()):
        points.sort()
        xs, ys = zip(*points)
        if source in BASELINE_STYLES:
            ax.plot(xs, ys, label=source, **BASELINE_STYLES[source])
        else:
            ax.plot(xs, ys, marker=".", markersize=3, label=f"{source} m={m}")
    ax.set_xlabel("average blocklength bound")
    ax.set_ylabel("rate (bits/use)")
    ax.set_title(args.title or channel)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
