"""Text formats for machines and decomposable functions.

Machine files::

    wfsm v1
    states 2
    symbols a b        # token "eps" reserved; auto-added if absent
    start 0 1.0
    end 1 1.0
    arc 0 1 a 0.5      # src dst symbol weight

Function files::

    func v1
    dim 3
    entry 0 1 a 0 2.5  # src dst symbol index value

Directives after the header may appear in any order; ``#`` starts a
comment; weights are decimal floats.  Parsing is total: every line either
matches a production or raises ParseError with its location.  Numbers are
emitted with 17 significant digits so serialization round-trips floats
bit-for-bit.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .errors import ParseError, ValidationError
from .expectations import DecomposableFunction
from .machine import EPSILON, Machine, machine_from_arcs, total_matrix

MACHINE_HEADER = ("wfsm", "v1")
FUNCTION_HEADER = ("func", "v1")


def format_float(x: float) -> str:
    """17 significant digits, positional; round-trips float64 exactly."""
    return np.format_float_positional(x, precision=17, unique=False,
                                      fractional=False, trim="k")


def _tokenized_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = line.split()
        if not tokens:
            continue
        columns = []
        pos = 0
        for tok in tokens:
            pos = line.index(tok, pos)
            columns.append(pos + 1)
            pos += len(tok)
        yield lineno, tokens, columns


def _parse_int(tok: str, lineno: int, column: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(lineno, column, f"expected {what} (an integer), got {tok!r}") from None


def _parse_float(tok: str, lineno: int, column: int, what: str) -> float:
    try:
        value = float(tok)
    except ValueError:
        raise ParseError(lineno, column, f"expected {what} (a float), got {tok!r}") from None
    if not np.isfinite(value):
        raise ParseError(lineno, column, f"{what} must be finite, got {tok!r}")
    return value


def _check_header(lines, expected: tuple[str, str], kind: str):
    try:
        lineno, tokens, columns = next(lines)
    except StopIteration:
        raise ParseError(1, 1, f"empty {kind} file") from None
    if tuple(tokens) != expected:
        raise ParseError(lineno, columns[0],
                         f"expected header {' '.join(expected)!r}")


def parse_machine(text: str) -> Machine:
    """Parse and validate a machine file; unlisted weights are zero.

    Raises ParseError on malformed input and ValidationError when the
    parsed machine violates a model invariant (negative weight, bad
    index, duplicate symbol, spectral radius at or above 1).
    """
    lines = _tokenized_lines(text)
    _check_header(lines, MACHINE_HEADER, "machine")

    num_states: int | None = None
    symbols: list[str] | None = None
    starts: list[tuple[int, float]] = []
    ends: list[tuple[int, float]] = []
    arcs: list[tuple[int, int, str, float]] = []
    for lineno, tokens, columns in lines:
        keyword = tokens[0]
        if keyword == "states":
            if len(tokens) != 2:
                raise ParseError(lineno, columns[0], "usage: states N")
            if num_states is not None:
                raise ParseError(lineno, columns[0], "duplicate states line")
            num_states = _parse_int(tokens[1], lineno, columns[1], "state count")
        elif keyword == "symbols":
            if symbols is not None:
                raise ParseError(lineno, columns[0], "duplicate symbols line")
            symbols = tokens[1:]
        elif keyword == "start" or keyword == "end":
            if len(tokens) != 3:
                raise ParseError(lineno, columns[0], f"usage: {keyword} i w")
            state = _parse_int(tokens[1], lineno, columns[1], "state index")
            weight = _parse_float(tokens[2], lineno, columns[2], "weight")
            (starts if keyword == "start" else ends).append((state, weight))
        elif keyword == "arc":
            if len(tokens) != 5:
                raise ParseError(lineno, columns[0], "usage: arc i j sym w")
            src = _parse_int(tokens[1], lineno, columns[1], "source state")
            dst = _parse_int(tokens[2], lineno, columns[2], "target state")
            weight = _parse_float(tokens[4], lineno, columns[4], "weight")
            arcs.append((src, dst, tokens[3], weight))
        else:
            raise ParseError(lineno, columns[0], f"unknown directive {keyword!r}")

    if num_states is None:
        raise ValidationError("machine file never declares 'states N'")
    if symbols is None:
        # no symbols directive: infer the alphabet from arcs, first seen first
        symbols = []
        for _, _, sym, _ in arcs:
            if sym != EPSILON and sym not in symbols:
                symbols.append(sym)
    alpha = np.zeros(num_states)
    omega = np.zeros(num_states)
    for state, weight in starts:
        if not 0 <= state < num_states:
            raise ValidationError(f"start state {state} out of range")
        alpha[state] += weight
    for state, weight in ends:
        if not 0 <= state < num_states:
            raise ValidationError(f"end state {state} out of range")
        omega[state] += weight
    machine = machine_from_arcs(num_states, symbols, alpha, omega, arcs)

    rho = linalg.spectral_radius(total_matrix(machine))
    if rho >= 1.0 - linalg.DIVERGENCE_MARGIN:
        raise ValidationError(f"spectral radius {rho:.12g} is not below 1")
    return machine


def serialize_machine(machine: Machine) -> str:
    """Inverse of :func:`parse_machine`, bit-for-bit on weights."""
    out = ["wfsm v1", f"states {machine.num_states}"]
    named = [sym for sym in machine.symbols if sym != EPSILON]
    if named:
        out.append("symbols " + " ".join(named))
    for i, w in enumerate(machine.alpha):
        if w != 0.0:
            out.append(f"start {i} {format_float(w)}")
    for i, w in enumerate(machine.omega):
        if w != 0.0:
            out.append(f"end {i} {format_float(w)}")
    for sym in machine.symbols:
        mat = machine.trans[sym]
        for src, dst in np.argwhere(mat != 0.0):
            out.append(f"arc {src} {dst} {sym} {format_float(mat[src, dst])}")
    return "\n".join(out) + "\n"


def parse_function(text: str, machine: Machine | None = None) -> DecomposableFunction:
    """Parse a decomposable-function file; validates against ``machine`` if given."""
    lines = _tokenized_lines(text)
    _check_header(lines, FUNCTION_HEADER, "function")

    dim: int | None = None
    entries: dict[tuple[str, int, int], dict[int, float]] = {}
    for lineno, tokens, columns in lines:
        keyword = tokens[0]
        if keyword == "dim":
            if len(tokens) != 2:
                raise ParseError(lineno, columns[0], "usage: dim R")
            if dim is not None:
                raise ParseError(lineno, columns[0], "duplicate dim line")
            dim = _parse_int(tokens[1], lineno, columns[1], "dimension")
        elif keyword == "entry":
            if len(tokens) != 6:
                raise ParseError(lineno, columns[0], "usage: entry src dst sym index value")
            src = _parse_int(tokens[1], lineno, columns[1], "source state")
            dst = _parse_int(tokens[2], lineno, columns[2], "target state")
            index = _parse_int(tokens[4], lineno, columns[4], "vector index")
            value = _parse_float(tokens[5], lineno, columns[5], "value")
            vec = entries.setdefault((tokens[3], src, dst), {})
            vec[index] = vec.get(index, 0.0) + value
        else:
            raise ParseError(lineno, columns[0], f"unknown directive {keyword!r}")
    if dim is None:
        raise ValidationError("function file never declares 'dim R'")
    func = DecomposableFunction.from_entries(dim, entries)
    if machine is not None:
        func.validate_for(machine)
    return func


def serialize_function(func: DecomposableFunction) -> str:
    out = ["func v1", f"dim {func.dim}"]
    for (sym, src, dst), vec in sorted(func.values.items()):
        for index, value in vec:
            out.append(f"entry {src} {dst} {sym} {index} {format_float(value)}")
    return "\n".join(out) + "\n"
