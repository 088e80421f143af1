"""Rank the measured pi0 pairings under each deployment priority.

Reproduces the selection guideline from the bundled measurement table:
which platform to pick when latency, unit cost, task energy, or a
composite of all three matters most, and how hard feasibility gates
(control frequency, memory) carve the candidate set first.

Run:  python3 demos/leaderboard_guideline.py
"""

from vlaperf import default_catalog
from vlaperf.leaderboard import Constraint, RankingPolicy
from vlaperf.serialize import recommendation_to_table


def main():
    cat = default_catalog()

    print("=== unconstrained, one policy per deployment question ===\n")
    for policy in (RankingPolicy.TIME_PRIORITY, RankingPolicy.COST_PRIORITY,
                   RankingPolicy.ENERGY_PRIORITY, RankingPolicy.CET):
        rec = cat.recommend("pi0", Constraint(), policy)
        print(recommendation_to_table(rec))
        print()

    print("=== a 5 Hz control-frequency requirement ===\n")
    rec = cat.recommend("pi0", Constraint(required_hz=5.0), RankingPolicy.TIME_PRIORITY)
    print(recommendation_to_table(rec))

    print("\n=== memory gates exclude before any sorting happens ===\n")
    rec = cat.recommend("openvla", Constraint(), RankingPolicy.TIME_PRIORITY)
    print(recommendation_to_table(rec))


if __name__ == "__main__":
    main()
