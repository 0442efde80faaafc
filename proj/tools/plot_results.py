#!/usr/bin/env python3
"""Plot fluidctl CSV outputs.

Usage:
  plot_results.py sweep  out/desk_gamma.csv  [plot.png]
  plot_results.py table  fluid_table.csv     [plot.png]
  plot_results.py oracle V.csv               [plot.png]

`sweep` draws mean delay versus the swept variable, one line per
controller (log y). `table` draws J(q) against the q^2/ln(q) envelope.
`oracle` draws the exact value function against the queue norm.
"""

import csv
import math
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def plot_sweep(rows, out):
    by_ctrl = {}
    for r in rows:
        by_ctrl.setdefault(r["controller"], []).append(
            (float(r["value"]), float(r["mean_delay"])))
    for ctrl, pts in sorted(by_ctrl.items()):
        pts.sort()
        plt.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                 label=ctrl)
    plt.xlabel(rows[0]["sweep_var"])
    plt.ylabel("mean delay (ms)")
    plt.yscale("log")
    plt.legend()
    plt.grid(True, which="both", alpha=0.3)
    plt.savefig(out, dpi=150, bbox_inches="tight")


def plot_table(rows, out):
    q = [float(r["q"]) for r in rows if float(r["q"]) > 0]
    J = [float(r["J"]) for r in rows if float(r["q"]) > 0]
    plt.plot(q, J, label="J(q)")
    band = [x for x in q if x > math.e]
    plt.plot(band, [0.2 * x * x / math.log(x) for x in band], "k--",
             label="0.2 q^2/ln q")
    plt.plot(band, [0.7 * x * x / math.log(x) for x in band], "k--",
             label="0.7 q^2/ln q")
    plt.xlabel("queue (packets)")
    plt.ylabel("fluid value")
    plt.loglog()
    plt.legend()
    plt.grid(True, which="both", alpha=0.3)
    plt.savefig(out, dpi=150, bbox_inches="tight")


def plot_oracle(rows, out):
    norm = [math.hypot(float(r["q1"]), float(r["q2"])) for r in rows]
    V = [float(r["V"]) for r in rows]
    plt.scatter(norm, V, s=6)
    plt.xlabel("||Q||")
    plt.ylabel("V(Q)")
    plt.grid(True, alpha=0.3)
    plt.savefig(out, dpi=150, bbox_inches="tight")


def main():
    if len(sys.argv) < 3:
        print(__doc__)
        return 2
    kind, path = sys.argv[1], sys.argv[2]
    out = sys.argv[3] if len(sys.argv) > 3 else path + ".png"
    rows = load(path)
    if kind == "sweep":
        plot_sweep(rows, out)
    elif kind == "table":
        plot_table(rows, out)
    elif kind == "oracle":
        plot_oracle(rows, out)
    else:
        print(__doc__)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
