"""Command-line front end.

Subcommands: check, partition, gradient, hessian, derivative, marginal,
expect, bench.  All numeric output uses 17 significant digits so values
re-parse bit-for-bit; tensor TSV rows are sorted by their index tuples
(symbols lexicographically, states numerically) for reproducible diffs.
"""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
from pathlib import Path

from . import bench as bench_mod
from . import derivatives, expectations, report
from .derivatives import DerivativeTensor
from .errors import WfsmError
from .fileformat import format_float, parse_function, parse_machine
from .machine import Machine, Transition, build_cache
from .oracle import plan_enumeration  # noqa: F401  (re-exported for scripting)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_output(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


def _load_machine(args) -> Machine:
    return parse_machine(_read(args.input))


def _tensor_tsv(tensor: DerivativeTensor) -> str:
    order = sorted(range(len(tensor.symbols)), key=lambda k: tensor.symbols[k])
    n = tensor.num_states
    triples = [(a, i, j) for a in order for i in range(n) for j in range(n)]
    lines = []
    for combo in itertools.product(triples, repeat=tensor.order):
        idx: list[int] = []
        fields: list[str] = []
        for a, i, j in combo:
            idx.extend((a, i, j))
            fields.extend((tensor.symbols[a], str(i), str(j)))
        fields.append(format_float(float(tensor.data[tuple(idx)])))
        lines.append("\t".join(fields))
    return "\n".join(lines) + "\n"


def _matrix_tsv(matrix) -> str:
    lines = ["\t".join(format_float(float(x)) for x in row) for row in matrix]
    return "\n".join(lines) + "\n"


def _parse_tuple(spec: str, machine: Machine) -> list[Transition]:
    out = []
    for part in spec.split(";"):
        tokens = part.split()
        if len(tokens) != 3:
            raise WfsmError(f"bad tuple element {part!r}; expected 'src dst sym'")
        try:
            src, dst = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise WfsmError(f"bad state index in tuple element {part!r}") from None
        if tokens[2] not in machine.symbols:
            raise WfsmError(f"unknown symbol {tokens[2]!r} in tuple")
        out.append(Transition(src, dst, tokens[2]))
    return out


def cmd_check(args) -> int:
    machine = _load_machine(args)
    cache = build_cache(machine)
    print(f"states {machine.num_states}")
    print(f"symbols {machine.alphabet_size}")
    print(f"rho {format_float(cache.rho)}")
    print(f"Z {format_float(cache.z)}")
    return 0


def cmd_partition(args) -> int:
    cache = build_cache(_load_machine(args))
    value = math.log(cache.z) if args.log else cache.z
    print(format_float(value))
    return 0


def cmd_gradient(args) -> int:
    machine = _load_machine(args)
    tensor = derivatives.gradient(build_cache(machine), machine)
    _write_output(_tensor_tsv(tensor), args.output)
    return 0


def cmd_hessian(args) -> int:
    machine = _load_machine(args)
    tensor = derivatives.hessian(build_cache(machine), machine)
    _write_output(_tensor_tsv(tensor), args.output)
    return 0


def cmd_derivative(args) -> int:
    machine = _load_machine(args)
    tensor = derivatives.derivative_tensor(build_cache(machine), machine, args.order)
    _write_output(_tensor_tsv(tensor), args.output)
    return 0


def cmd_marginal(args) -> int:
    machine = _load_machine(args)
    cache = build_cache(machine)
    tau = _parse_tuple(args.tuple, machine)
    if args.literal:
        value = derivatives.tuple_marginal_literal(cache, machine, tau)
    else:
        if len(tau) > 2:
            raise WfsmError("tuples longer than 2 need --literal (prefix form)")
        value = derivatives.tuple_marginal(cache, machine, tau)
    print(format_float(value))
    return 0


def cmd_expect(args) -> int:
    machine = _load_machine(args)
    cache = build_cache(machine)
    r = parse_function(_read(args.r_func), machine)
    if args.covariance:
        matrix = expectations.covariance(cache, machine, r)
    else:
        t = parse_function(_read(args.t_func), machine) if args.t_func else r
        matrix = expectations.second_order_expectation(cache, machine, r, t).matrix
    _write_output(_matrix_tsv(matrix), args.output)
    return 0


def cmd_bench(args) -> int:
    sizes = bench_mod.doubling_sizes(args.min_states, args.max_states)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    rows = bench_mod.run_bench(sizes, args.alphabet, args.seeds, methods)
    _write_output(report.report_tsv(rows), args.output)
    plot_path = args.plot
    if plot_path is None and args.output is not None and not args.no_plot:
        plot_path = str(Path(args.output).with_suffix(".png"))
    if plot_path is not None and not args.no_plot:
        report.render_scaling_figure(rows, plot_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wfsm",
        description="Partition functions, derivative tensors, and second-order "
                    "expectations for cyclic weighted finite-state machines.")
    parser.add_argument("--threads", type=int,
                        default=int(os.environ.get("WFSM_THREADS", "1")),
                        help="worker threads for tensor fills; output is "
                             "identical for any value")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("check", cmd_check, "validate a machine file and report N, A, rho, Z")
    p.add_argument("-i", "--input", required=True)

    p = add("partition", cmd_partition, "print Z (or log Z)")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--log", action="store_true")

    p = add("gradient", cmd_gradient, "TSV of dZ/dW^(a)_ij")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output")

    p = add("hessian", cmd_hessian, "TSV of d2Z over transition weight pairs")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output")

    p = add("derivative", cmd_derivative, "TSV of the order-m derivative tensor")
    p.add_argument("-m", "--order", type=int, required=True)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output")

    p = add("marginal", cmd_marginal, "expected co-occurrence of a transition tuple")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--tuple", required=True,
                   help="'src dst sym' elements separated by ';'")
    p.add_argument("--literal", action="store_true",
                   help="use the order-dependent prefix-sum form")

    p = add("expect", cmd_expect, "second-order expectation E[r t^T] (or covariance)")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-r", "--r-func", required=True)
    p.add_argument("-t", "--t-func")
    p.add_argument("--covariance", action="store_true")
    p.add_argument("-o", "--output")

    p = add("bench", cmd_bench, "scaling benchmark over random machines")
    p.add_argument("--min-states", type=int, required=True)
    p.add_argument("--max-states", type=int, required=True)
    p.add_argument("--alphabet", type=int, required=True)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--methods", default="closed,fd")
    p.add_argument("-o", "--output")
    p.add_argument("--plot", help="figure path (defaults to the output path "
                                  "with a .png suffix)")
    p.add_argument("--no-plot", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WfsmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
