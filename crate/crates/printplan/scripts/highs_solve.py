#!/usr/bin/env python3
"""Solve an LP-format model with HiGHS and write a printplan solution file.

usage: highs_solve.py MODEL.lp SOLUTION.sol [--time-limit S] [--gap G] [--threads N]
"""
import argparse
import sys

import highspy


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("lp")
    ap.add_argument("sol")
    ap.add_argument("--time-limit", type=float, default=600.0)
    ap.add_argument("--gap", type=float, default=1e-9)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", args.time_limit)
    h.setOptionValue("mip_rel_gap", args.gap)
    h.setOptionValue("threads", max(1, args.threads))
    if h.readModel(args.lp) != highspy.HighsStatus.kOk:
        print(f"cannot read {args.lp}", file=sys.stderr)
        return 1
    h.run()

    status = h.getModelStatus()
    info = h.getInfo()
    has_sol = info.primal_solution_status == 2  # kSolutionStatusFeasible
    ms = highspy.HighsModelStatus
    if status == ms.kOptimal:
        token = "OPTIMAL"
    elif status in (ms.kInfeasible, ms.kUnboundedOrInfeasible):
        token = "INFEASIBLE"
    elif status == ms.kTimeLimit:
        token = "TIMELIMIT"
    elif has_sol:
        token = "FEASIBLE"
    else:
        print(f"HiGHS stopped with {h.modelStatusToString(status)}", file=sys.stderr)
        return 1

    with open(args.sol, "w") as out:
        if token == "INFEASIBLE" or not has_sol:
            out.write(f"{token}\n")
            return 0
        out.write(f"{token} {info.objective_function_value!r}\n")
        lp = h.getLp()
        values = h.getSolution().col_value
        for name, v in zip(lp.col_names_, values):
            out.write(f"{name} {v!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
