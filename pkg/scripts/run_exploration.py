#!/usr/bin/env python3
"""Full estimation-and-partitioning walkthrough on the bundled scenario.

Prints the per-element principal estimates, the per-behavior table, the
exhaustive mapping sweep with the shortlist, and the selected partition --
the whole workflow in one run.
"""

from importlib import resources

from pcm2pwm import dse, profiler


def main():
    data = resources.files("pcm2pwm").joinpath("data")
    scenario = dse.load_scenario(str(data / "baseline.scenario"))
    pes = profiler.load_pe_library(str(data / "pe_library.ini"))
    playback_s = scenario.cost_model.deadline_ms / 1000.0

    print("=== principal estimates per element ===")
    rows = profiler.principal_summary_rows(scenario.principal_cycles, pes,
                                           playback_s)
    print(profiler.format_principal_summary(rows, playback_s))

    print("=== per-behavior estimates ===")
    print(dse.estimates_table_text(scenario))

    cm = scenario.cost_model
    options = dse.enumerate_partitions(scenario.estimates, cm)
    selected = dse.select(options, cm)

    print(dse.options_table_text(
        options, selected,
        title=f"=== all {len(options)} mappings, deadline "
              f"{cm.deadline_ms:.0f} ms ==="))

    shortlist = [o for m in dse.SHORTLIST_MAPPINGS
                 for o in options if o.hw_set == m]
    print(dse.options_table_text(shortlist, selected,
                                 title="=== shortlisted mappings ==="))

    rivals = [o for o in shortlist if o != selected and o.feasible]
    if rivals:
        rival = min(rivals, key=lambda o: o.cost_cents)
        delta = dse.compare(rival, selected)
        print(f"{rival.describe_hw_set()} vs {selected.describe_hw_set()}: "
              f"{delta.time_delta_pct:.2f}% faster for "
              f"{delta.cost_delta_pct:.2f}% more money")
    print(f"\nselected mapping: {selected.describe_hw_set()} "
          f"({selected.t_total_ms:.1f} ms, ${selected.cost_usd:.2f})")


if __name__ == "__main__":
    main()
