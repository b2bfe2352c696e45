"""Replay the reference aggregate values stored in the test fixtures.

Drives the k_max tuner with the per-candidate aggregates, ranks channels by the
stored expert/novice means, and lists the strongest per-style deltas.

    python3 scripts/replay_reference.py
"""

import argparse
import json
from pathlib import Path

import numpy as np

from hfdkit import ChannelRegistry, Group, HfdVector, group_delta, top_n_channels
from hfdkit.kmax import report_from_aggregates

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "reference_values.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fixture", type=Path, default=FIXTURE)
    ap.add_argument("--top-n", type=int, default=10)
    args = ap.parse_args()
    ref = json.loads(args.fixture.read_text())

    f1, f2 = ref["kmax_mean_hfd"], ref["kmax_channel_spread"]
    rep = report_from_aggregates(dict(zip(f1["k_max"], f1["mean"])), dict(zip(f2["k_max"], f2["mean"])),
                                 dict(zip(f1["k_max"], f1["std"])), dict(zip(f2["k_max"], f2["std"])))
    print("k_max   mean HFD   mean spread")
    for k in rep.candidates:
        mark = "  <- chosen" if k == rep.chosen else ""
        print(f"{k:>5}   {rep.mean_hfd[k]:.5f}    {rep.mean_spread[k]:.5f}{mark}")

    f3 = ref["top10_channel_means"]
    ex = HfdVector(dict(zip(f3["channels"], f3["expert"])), None, "experts", "all", Group.EXPERT)
    nov = HfdVector(dict(zip(f3["channels"], f3["novice"])), None, "novices", "all", Group.NOVICE)
    delta = group_delta([ex], [nov])
    print("\nexpert - novice mean HFD, ranked by |delta|")
    for c, v in top_n_channels(delta, min(args.top_n, len(delta.channels))):
        print(f"  {c:<8}{v:+.5f}")

    f5 = ref["style_split_deltas"]
    order = ChannelRegistry.default().labels
    print("\nstrongest per-style expert - novice deltas")
    for style in ("algebraic", "geometric"):
        vals = np.array(f5[style])
        idx = sorted(range(len(vals)), key=lambda i: (-abs(vals[i]), order.index(f5["channels"][i])))[: args.top_n]
        print(f"  {style}: " + ", ".join(f"{f5['channels'][i]} {vals[i]:+.4f}" for i in idx))


if __name__ == "__main__":
    main()
