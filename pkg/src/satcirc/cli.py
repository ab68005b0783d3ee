"""Command line front end: run, compile, verify, complexity.

Exit codes: 0 clean, 1 verification found mismatches, 2 for unusable
requests (bad flags, unparsable spec files, uncompilable specs). All
artifacts land under --out-dir (default $SATCIRC_OUT or ./out), written
atomically, and seeded invocations are byte-reproducible.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass

from .bitnum import BitNumError
from .builtins import BUILTIN_NAMES, builtin_spec
from .circuit import (CircuitError, eval_batch, family_analyze, from_json,
                      metrics, to_dot, to_json)
from .compile import (CompileError, compile_hard, compile_saturated,
                      default_samples, encode_word, plan_widths,
                      verify_equivalence)
from .machine import (AttentionKind, MachineError, instrument_sizes,
                      load_spec, recognize, run)
from .synth import SynthError, manifest

OUT_DIR_ENV = "SATCIRC_OUT"
USER_ERRORS = (MachineError, CompileError, CircuitError, BitNumError,
               SynthError, OSError, ValueError)


@dataclass
class RunConfig:
    """One parsed invocation; every cmd_* consumes one of these."""

    command: str
    spec: str = None
    builtin: str = None
    pred: str = None
    n: int = None
    n_list: tuple = ()
    input: str = None
    trace: bool = False
    values: bool = False
    mode: str = "exhaustive"
    samples: int = 1000
    seed: int = 0
    out_dir: str = None
    format: str = "json"
    circuit: str = None

    @property
    def out(self) -> str:
        return self.out_dir or os.environ.get(OUT_DIR_ENV) or "out"


def _write(path: str, text: str):
    """Atomic replace so a crashed run never leaves half a file."""
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _load(cfg: RunConfig):
    if bool(cfg.spec) == bool(cfg.builtin):
        raise MachineError("give exactly one of --spec FILE or --builtin NAME")
    if cfg.spec:
        return load_spec(cfg.spec)
    return builtin_spec(cfg.builtin, cfg.pred)


def _compiler_for(spec):
    kinds = {h.attention for l in spec.layers for h in l.heads}
    return compile_hard if kinds == {AttentionKind.HARD} else compile_saturated


def _ns(cfg: RunConfig) -> tuple:
    ns = cfg.n_list or ((cfg.n,) if cfg.n else ())
    if not ns:
        raise MachineError("need --n or --n-list")
    return ns


def _pair(v) -> list:
    num, den = v.as_pair()
    return [num, den]


def _trace_json(spec, t, accept: bool) -> dict:
    return {
        "spec": spec.name or "spec",
        "input": t.input,
        "n": t.n,
        "accept": accept,
        "values": [[[_pair(c) for c in vec] for vec in layer]
                   for layer in t.values],
        "scores": [[[[_pair(s) for s in row] for row in head]
                    for head in layer] for layer in t.scores],
        "tie_sets": [[[list(row) for row in head] for head in layer]
                     for layer in t.ties],
        "head_out": [[[[_pair(c) for c in vec] for vec in head]
                      for head in layer] for layer in t.head_out],
        "layer_max_size": list(t.layer_max_size),
    }


def cmd_run(cfg: RunConfig) -> int:
    spec = _load(cfg)
    if not cfg.input:
        raise MachineError("run needs --input WORD")
    accept = recognize(spec, cfg.input)
    print(f"{spec.name or 'spec'} on {cfg.input!r}: "
          f"{'accept' if accept else 'reject'}")
    if cfg.trace:
        t = run(spec, cfg.input)
        path = os.path.join(cfg.out, f"{spec.name or 'spec'}.trace.json")
        _write(path, json.dumps(_trace_json(spec, t, accept), indent=2))
        print(f"trace -> {path}")
    return 0


def cmd_compile(cfg: RunConfig) -> int:
    spec = _load(cfg)
    if len(_ns(cfg)) != 1:
        raise MachineError("compile takes a single --n")
    n = _ns(cfg)[0]
    plan = plan_widths(spec, n)
    c = _compiler_for(spec)(spec, n, plan, include_values=cfg.values)
    name = spec.name or "spec"
    base = os.path.join(cfg.out, f"{name}_n{n}")
    _write(base + ".json", to_json(c, indent=2))
    wrote = [base + ".json"]
    if cfg.format == "dot":
        _write(base + ".dot", to_dot(c))
        wrote.append(base + ".dot")
    man = manifest(c, name, n=n,
                   width_plan={r: list(v) for r, v in
                               sorted(plan.roles.items())})
    _write(base + ".manifest.json", json.dumps(man, indent=2))
    wrote.append(base + ".manifest.json")
    m = metrics(c)
    print(f"{name} n={n}: size={m.size} depth={m.depth} "
          f"theta={m.theta_count}")
    for p in wrote:
        print(f"  -> {p}")
    return 0


def _verify_against_file(cfg: RunConfig, spec):
    """Recheck a circuit artifact; a corrupted file shows up as plain
    mismatches, not a crash."""
    if len(_ns(cfg)) != 1:
        raise MachineError("--circuit verification takes a single --n")
    n = _ns(cfg)[0]
    with open(cfg.circuit) as f:
        c = from_json(f.read())
    from .compile import EquivReport, EquivRow, _word_batch
    words = _word_batch(spec, n, cfg.mode, cfg.samples, cfg.seed)
    got = eval_batch(c, [encode_word(spec, w) for w in words])
    bad, first = 0, None
    for w, out in zip(words, got):
        if bool(out[0]) != recognize(spec, w):
            bad += 1
            first = first if first is not None else w
    return EquivReport(spec.name or "spec",
                       (EquivRow(n, cfg.mode, len(words), bad, first),))


def cmd_verify(cfg: RunConfig) -> int:
    spec = _load(cfg)
    if cfg.circuit:
        rep = _verify_against_file(cfg, spec)
    else:
        rep = verify_equivalence(spec, _ns(cfg), cfg.mode, cfg.samples,
                                 cfg.seed, compile_fn=_compiler_for(spec))
    buf = io.StringIO()
    wr = csv.writer(buf)
    wr.writerow(["n", "mode", "tested", "mismatches",
                 "first_counterexample"])
    for r in rep.rows:
        wr.writerow([r.n, r.mode, r.tested, r.mismatches,
                     r.first_counterexample or ""])
        status = "ok" if r.mismatches == 0 else "MISMATCH"
        extra = ("" if r.first_counterexample is None
                 else f" first={r.first_counterexample}")
        print(f"n={r.n} {r.mode} tested={r.tested} "
              f"mismatches={r.mismatches}{extra} [{status}]")
    path = os.path.join(cfg.out, "verify.csv")
    _write(path, buf.getvalue())
    print(f"report -> {path}")
    return 0 if rep.ok else 1


def cmd_complexity(cfg: RunConfig) -> int:
    spec = _load(cfg)
    ns = _ns(cfg)
    if len(ns) < 3:
        raise MachineError("complexity wants --n-list with at least three n")
    compiler = _compiler_for(spec)
    fam = family_analyze(lambda n: compiler(spec, n), ns)
    inputs = {n: default_samples(spec, n, seed=cfg.seed) for n in ns}
    sizes = instrument_sizes(spec, inputs)
    bits = {r.n: r.overall for r in sizes.rows}
    buf = io.StringIO()
    wr = csv.writer(buf)
    wr.writerow(["n", "size", "depth", "theta_count", "max_fanin",
                 "max_value_bits"])
    for r in fam.rows:
        wr.writerow([r.n, r.size, r.depth, r.theta_count, r.max_fanin,
                     bits[r.n]])
        print(f"n={r.n} size={r.size} depth={r.depth} "
              f"theta={r.theta_count} value_bits={bits[r.n]}")
    path = os.path.join(cfg.out, "complexity.csv")
    _write(path, buf.getvalue())
    print(f"size slope {fam.slope:.3f} (log-log), depth "
          f"{'constant' if fam.depth_constant else 'VARIES'}, "
          f"value bits fit {sizes.a:.2f} + {sizes.b:.2f}*log2(n)")
    print(f"report -> {path}")
    return 0


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of ints: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="satcirc",
        description="saturated-attention transformers over exact binary "
                    "arithmetic, and their threshold-circuit compilations")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_n=True):
        sp.add_argument("--spec", help="s-expression spec file")
        sp.add_argument("--builtin", choices=BUILTIN_NAMES + ("maj-q",),
                        help="built-in construction")
        sp.add_argument("--pred", choices=("parity", "bigram11"),
                        help="predicate for host-backed builtins")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out-dir", dest="out_dir",
                        help=f"artifact directory (default ${OUT_DIR_ENV} "
                             "or ./out)")
        if with_n:
            sp.add_argument("--n", type=int)
            sp.add_argument("--n-list", dest="n_list", type=_int_list,
                            default=(), help="comma list, e.g. 4,8,16")

    sp = sub.add_parser("run", help="evaluate the machine on one word")
    common(sp, with_n=False)
    sp.add_argument("--input", help="token string")
    sp.add_argument("--trace", action="store_true",
                    help="also write the full value trace as JSON")

    sp = sub.add_parser("compile", help="emit the circuit for one n")
    common(sp)
    sp.add_argument("--format", choices=("json", "dot"), default="json",
                    help="dot additionally writes a graphviz file")
    sp.add_argument("--values", action="store_true",
                    help="also expose final-layer value wires as outputs")

    sp = sub.add_parser("verify", help="circuit vs machine, word by word")
    common(sp)
    sp.add_argument("--mode", choices=("exhaustive", "random"),
                    default="exhaustive")
    sp.add_argument("--samples", type=int, default=1000,
                    help="words per n in random mode")
    sp.add_argument("--circuit", help="recheck this circuit JSON "
                                      "instead of compiling")

    sp = sub.add_parser("complexity",
                        help="size/depth/theta growth across n")
    common(sp)
    return p


COMMANDS = {"run": cmd_run, "compile": cmd_compile, "verify": cmd_verify,
            "complexity": cmd_complexity}


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(**vars(ns))
    try:
        return COMMANDS[cfg.command](cfg)
    except USER_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
