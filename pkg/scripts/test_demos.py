#!/usr/bin/env python

import os
import sys
import subprocess
import tempfile

# The mlmcdrop directory
MDDIR = os.path.realpath(os.path.dirname(sys.argv[0]) + "/..")
print(MDDIR)

# Demo configurations to run, with the sub-commands each one supports
demos = [
    {"path": "demos/estimate_uniform.json", "commands": ["estimate"]},
    {"path": "demos/rate_study_uniform.json", "commands": ["rate-study"]},
    {"path": "demos/rate_study_mlp.json", "commands": ["rate-study"]},
    {"path": "demos/allocate_variance.json", "commands": ["allocate", "ladder"]},
    {"path": "demos/fixed_cost_uniform.json", "commands": ["fixed-cost"]},
    {"path": "demos/bands_mlp.json", "commands": ["bands"]},
]


def test_demos(output_dir):
    """
    Run every sub-command of every configuration in `demos` through the
    ``mlmcdrop`` entry point.

    Returns:
        num_errors (int): Number of runs that failed
        num_passed (int): Number of runs that succeeded
    """
    num_errors = 0
    num_passed = 0
    for demo in demos:
        config = os.path.join(MDDIR, demo["path"])
        for command in demo["commands"]:
            out = os.path.join(output_dir, command, os.path.basename(config))
            cmd_line = [
                sys.executable,
                "-m",
                "mlmcdrop",
                command,
                "-c",
                config,
                "-o",
                out,
                "--no-timestamp",
            ]

            print("\033[1;33;40m|Running {} {}\033[0m".format(command, demo["path"]))
            procout = subprocess.run(cmd_line, check=False, cwd=MDDIR)

            if procout.returncode != 0:
                num_errors += 1
                print(
                    "| {} {}  \033[1;31;40m -- FAILED ({})\033[0m".format(
                        command, demo["path"], procout.returncode
                    )
                )
            else:
                num_passed += 1
                print("| {} {}  \033[1;32;40m -- SUCCEEDED\033[0m".format(command, demo["path"]))
            print()
    return num_errors, num_passed


if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as output_dir:
        num_errors, num_passed = test_demos(output_dir)

    print("=" * 100)
    print("\033[1;31;40m" if num_errors > 0 else "\033[1;32;40m")
    print(f"Demo runs: {num_passed} passed and {num_errors} failed")
    print("\033[0m")
    print("=" * 100)

    sys.exit(1 if num_errors > 0 else 0)
