"""Compare HFD estimates with the known dimensions of synthetic signals.

    python3 scripts/validate_oracles.py --length 8192 --k-max 100 --realizations 20
"""

import argparse
from dataclasses import replace

import numpy as np

from hfdkit import SynthSpec, expected_fd, generate, higuchi_fd


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=int, default=8192)
    ap.add_argument("--k-max", type=int, default=100)
    ap.add_argument("--realizations", type=int, default=20)
    args = ap.parse_args()

    cases = [SynthSpec("ramp", args.length)]
    cases += [SynthSpec("white_noise", args.length)]
    cases += [SynthSpec("fbm", args.length, hurst=h) for h in (0.2, 0.3, 0.5, 0.7, 0.8)]
    cases += [SynthSpec("weierstrass", args.length, a=0.5, b=3.0), SynthSpec("weierstrass", args.length, a=0.7, b=2.0)]

    print(f"{'signal':<28}{'expected':>10}{'mean HFD':>10}{'std':>8}{'bias':>9}")
    for base in cases:
        n_runs = 1 if base.kind.value == "ramp" else args.realizations
        vals = np.array([higuchi_fd(generate(replace(base, seed=s)), args.k_max) for s in range(n_runs)])
        target = expected_fd(base)
        label = base.kind.value
        if base.kind.value == "fbm":
            label += f" H={base.hurst}"
        elif base.kind.value == "weierstrass":
            label += f" a={base.a} b={base.b}"
        print(f"{label:<28}{target:>10.4f}{vals.mean():>10.4f}{vals.std():>8.4f}{vals.mean() - target:>+9.4f}")


if __name__ == "__main__":
    main()
