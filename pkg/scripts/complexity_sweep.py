#!/usr/bin/env python3
"""Circuit growth sweep: one compiled circuit per n, metrics to CSV.

python3 scripts/complexity_sweep.py --builtin maj --n-list 4,8,16,32,64
"""

import sys

from satcirc.cli import main

if __name__ == "__main__":
    sys.exit(main(["complexity"] + sys.argv[1:]))
