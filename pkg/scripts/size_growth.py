#!/usr/bin/env python3
"""Machine-side value-size growth: trace sample inputs across n and fit
the a + b*log2(n) envelope. No circuits are built, so n can go far past
what compilation handles.

python3 scripts/size_growth.py --builtin maj --n-list 8,16,64,256,512
"""

import argparse
import csv
import os
import sys

from satcirc.builtins import builtin_spec
from satcirc.cli import OUT_DIR_ENV, _int_list, _write
from satcirc.compile import default_samples
from satcirc.machine import instrument_sizes, load_spec


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--spec")
    p.add_argument("--builtin")
    p.add_argument("--pred")
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--samples", type=int, default=8,
                   help="traced words per n")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir")
    a = p.parse_args(argv)
    spec = (load_spec(a.spec) if a.spec
            else builtin_spec(a.builtin, a.pred))
    inputs = {n: default_samples(spec, n, count=a.samples, seed=a.seed)
              for n in a.n_list}
    rep = instrument_sizes(spec, inputs)
    out = a.out_dir or os.environ.get(OUT_DIR_ENV) or "out"
    path = os.path.join(out, "size_growth.csv")
    import io
    buf = io.StringIO()
    wr = csv.writer(buf)
    wr.writerow(["n", "max_value_bits"] +
                [f"layer{t}_bits" for t in range(len(rep.rows[0].per_layer))])
    for r in rep.rows:
        wr.writerow([r.n, r.overall] + list(r.per_layer))
        print(f"n={r.n} max_bits={r.overall} per_layer={r.per_layer}")
    _write(path, buf.getvalue())
    print(f"envelope: {rep.a:.2f} + {rep.b:.2f}*log2(n)  "
          f"margins {'all >= 0' if rep.ok else 'VIOLATED'}")
    print(f"report -> {path}")
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
