#!/usr/bin/env python3
"""Full-scale simulation study: n up to 1e4, 100 replications for RMSE and
subgradient tables, 300 for coverage.  This is the opt-in long run (hours,
depending on workers); the desk profile covers day-to-day checks.
"""

import argparse
import os
from dataclasses import replace

from dirquant import io, simlab


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="full-study")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=simlab.PAPER_PROFILE.master_seed)
    parser.add_argument("--coverage-replications", type=int, default=300)
    args = parser.parse_args()

    config = replace(simlab.PAPER_PROFILE, master_seed=args.seed)
    os.makedirs(args.out, exist_ok=True)

    tables = simlab.simulation_tables(config, workers=args.workers)
    io.write_table_csv(os.path.join(args.out, "rmse.csv"), tables["rmse"])
    io.write_table_csv(os.path.join(args.out, "subgradient.csv"), tables["subgradient"])

    cov_cfg = replace(config, dgps=(1, 2, 3), replications=args.coverage_replications)
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
        io.provenance_block({"profile": "paper"}, config.master_seed),
    )
    print(f"wrote full-scale tables to {args.out}/")


if __name__ == "__main__":
    main()
