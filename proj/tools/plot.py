#!/usr/bin/env python3
"""Plot metrics from a report's plot_data.csv, one panel per metric."""
import argparse
import csv
from collections import defaultdict

import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("plot_data")
    ap.add_argument("metrics", nargs="+")
    ap.add_argument("-o", "--output", help="write an image instead of showing")
    args = ap.parse_args()

    series = defaultdict(lambda: defaultdict(list))
    with open(args.plot_data, newline="") as f:
        for row in csv.DictReader(f):
            if row["metric"] in args.metrics:
                s = series[row["metric"]][row["scenario"]]
                s.append((int(row["tick"]), float(row["value"])))

    fig, axes = plt.subplots(len(args.metrics), 1, sharex=True, squeeze=False,
                             figsize=(8, 2.6 * len(args.metrics)))
    for ax, metric in zip(axes[:, 0], args.metrics):
        for scenario, points in sorted(series[metric].items()):
            ticks, values = zip(*sorted(points))
            ax.plot(ticks, values, label=scenario)
        ax.set_ylabel(metric)
        ax.legend(fontsize="small")
    axes[-1, 0].set_xlabel("tick")
    fig.tight_layout()
    if args.output:
        fig.savefig(args.output, dpi=120)
    else:
        plt.show()


if __name__ == "__main__":
    main()
