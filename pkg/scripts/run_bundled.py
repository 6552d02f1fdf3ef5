#!/usr/bin/env python3
"""Run the full identity suite on every bundled scenario and print reports."""

import sys
import time

from rcdirac import fieldspec, harness


def main():
    failures = 0
    for name in harness.bundled_scenario_names():
        path = harness.resolve_scenario_path(name)
        scenario = fieldspec.load_scenario_file(path, valid_checks=set(harness.CHECKS))
        t0 = time.perf_counter()
        report = harness.run_suite(scenario)
        dt = time.perf_counter() - t0
        print(f"=== {name} ({report.points} points, tol {report.tol:g}, {dt:.1f}s)")
        sys.stdout.write(report.to_text())
        if not report.all_passed():
            failures += 1
    if failures:
        print(f"{failures} scenario(s) with failing checks", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
