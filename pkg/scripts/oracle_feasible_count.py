#!/usr/bin/env python3
"""Brute-force oracle over all 64 HW/SW mappings of the six converter behaviors.

Deliberately independent of the package: raw constants and itertools only.
Prints the feasible-option count under the 4300 ms deadline plus the
per-mapping time/cost grid, used to freeze golden numbers in the test suite.
"""

import itertools

# per-behavior (t_hw_ms, t_sw_ms, hw_cost_share_usd)
DATA = {
    "S0": (2.2, 5.4, 0.01),
    "S1": (183.3, 305.6, 8.17),
    "S2": (502.0, 836.7, 10.73),
    "S3": (988.1, 1646.4, 10.65),
    "LINE": (77.4, 188.1, 3.60),
    "MOLD": (749.1, 1566.7, 1.60),
}
SW_FIXED_COST = 9.00
DEADLINE_MS = 4300.0

BEHAVIORS = list(DATA)


def evaluate(hw_set):
    t_hw = sum(DATA[b][0] for b in hw_set)
    t_sw = sum(DATA[b][1] for b in BEHAVIORS if b not in hw_set)
    cost = SW_FIXED_COST + sum(DATA[b][2] for b in hw_set)
    return t_sw, t_hw, t_sw + t_hw, cost


def main():
    rows = []
    for r in range(len(BEHAVIORS) + 1):
        for combo in itertools.combinations(BEHAVIORS, r):
            t_sw, t_hw, total, cost = evaluate(set(combo))
            rows.append((set(combo), t_sw, t_hw, total, cost))

    feasible = [row for row in rows if row[3] < DEADLINE_MS]
    print(f"total mappings: {len(rows)}")
    print(f"feasible (< {DEADLINE_MS} ms): {len(feasible)}")

    cheapest = min(feasible, key=lambda row: (row[4], row[3], len(row[0])))
    print(f"cheapest feasible: hw_set={sorted(cheapest[0])} "
          f"total={cheapest[3]:.1f} ms cost=${cheapest[4]:.2f}")

    # feasible count under alternative deadlines, for the selection tests
    for deadline in (3500.0, 1000.0):
        feas = [row for row in rows if row[3] < deadline]
        best = min(feas, key=lambda row: (row[4], row[3], len(row[0]))) if feas else None
        print(f"deadline {deadline:.0f} ms: {len(feas)} feasible, "
              f"cheapest={sorted(best[0]) if best else None}")

    for hw in ({"S3"}, {"S1", "S2", "S3"}, {"LINE", "MOLD"}, {"MOLD"}):
        t_sw, t_hw, total, cost = evaluate(hw)
        print(f"{sorted(hw)}: t_sw={t_sw:.1f} t_hw={t_hw:.1f} "
              f"total={total:.1f} cost={cost:.2f}")


if __name__ == "__main__":
    main()
