"""Run a penalty_ns subcommand, e.g.

    python run_main.py convergence -e configs/study_eta04.toml
"""

import sys

from penalty_ns.cli import main

if __name__ == "__main__":
    sys.exit(main())
