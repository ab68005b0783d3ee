#!/usr/bin/env python3
"""Circuit-vs-machine agreement sweep across input lengths.

python3 scripts/equivalence_sweep.py --builtin maj --n-list 2,4,6,8
python3 scripts/equivalence_sweep.py --builtin maj --n-list 16,32 \
        --mode random --samples 500 --seed 1
"""

import sys

from satcirc.cli import main

if __name__ == "__main__":
    sys.exit(main(["verify"] + sys.argv[1:]))
