#!/usr/bin/env python3
"""Write the synthetic classroom-study fixture CSV used in examples and docs."""

import argparse

from dirquant.io import atomic_write_text
from dirquant.simlab import make_star_like


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="star_like.csv")
    parser.add_argument("--n", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    cols = make_star_like(args.n, seed=args.seed)
    names = ["math", "read", "small_class", "experience"]
    lines = [",".join(names)]
    for i in range(args.n):
        lines.append(",".join(f"{cols[name][i]:.0f}" for name in names))
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"wrote {args.n} rows to {args.out}")


if __name__ == "__main__":
    main()
