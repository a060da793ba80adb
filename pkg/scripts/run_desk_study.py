#!/usr/bin/env python3
"""Desk-scale simulation study: RMSE, subgradient, coverage, conditional tables.

Runs in a few minutes; writes CSV tables plus a provenance block.  Equivalent
to `dirquant simulate --set profile=desk`.
"""

import argparse
import os
from dataclasses import replace

from dirquant import io, simlab


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="desk-study")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=simlab.DESK_PROFILE.master_seed)
    args = parser.parse_args()

    config = replace(simlab.DESK_PROFILE, master_seed=args.seed)
    os.makedirs(args.out, exist_ok=True)

    tables = simlab.simulation_tables(config, workers=args.workers)
    io.write_table_csv(os.path.join(args.out, "rmse.csv"), tables["rmse"])
    io.write_table_csv(os.path.join(args.out, "subgradient.csv"), tables["subgradient"])

    cov_cfg = replace(config, dgps=(1, 2, 3))
    io.write_table_csv(
        os.path.join(args.out, "coverage.csv"),
        simlab.coverage_experiment(cov_cfg, workers=args.workers),
    )
    io.write_table_csv(
        os.path.join(args.out, "conditional.csv"),
        simlab.conditional_rmse_experiment(config, workers=args.workers),
    )
    io.write_json(
        os.path.join(args.out, "provenance.json"),
        io.provenance_block({"profile": "desk"}, config.master_seed),
    )
    print(f"wrote desk-scale tables to {args.out}/")


if __name__ == "__main__":
    main()
