"""Built-in functions, distributions, and protocols for tests and the CLI.

Function families are addressed as ``FAMILY,n[,extra]`` (with an optional
``corpus:`` prefix): EQ, GT, DISJ, IP on n-bit strings (n <= 3, so matrices
stay within the 8x8 enumeration cap), AND over single bits, CONST with the
constant as the parameter, and GHD with an integer promise gap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import InputDistribution, PartialFunction
from .errors import DegenerateInputError, ParameterError
from .protocol import Leaf, Node, ProtocolTree

__all__ = [
    "CorpusSpec",
    "parse_spec",
    "make_function",
    "make_distribution",
    "make_protocol",
    "corpus_functions",
    "corpus_triples",
]

_MAX_BITS = 3


@dataclass(frozen=True)
class CorpusSpec:
    family: str
    n: int
    extra: float | int | None = None


def parse_spec(text: str) -> CorpusSpec:
    """Parse ``[corpus:]FAMILY,n[,extra]``."""
    body = text.removeprefix("corpus:")
    parts = [p.strip() for p in body.split(",")]
    if not parts or not parts[0]:
        raise ParameterError(f"empty corpus spec {text!r}")
    family = parts[0].upper()
    n = int(parts[1]) if len(parts) > 1 else 1
    extra: float | int | None = None
    if len(parts) > 2:
        raw = parts[2]
        extra = int(raw) if raw.lstrip("+-").isdigit() else float(raw)
    return CorpusSpec(family, n, extra)


# ---------------------------------------------------------------------------
# Functions
# ---------------------------------------------------------------------------


def _bit_function(n: int, rule) -> PartialFunction:
    if not (1 <= n <= _MAX_BITS):
        raise ParameterError(f"n must lie in [1, {_MAX_BITS}]")
    size = 2**n
    table = tuple(
        tuple(rule(x, y) for y in range(size)) for x in range(size)
    )
    return PartialFunction(size, size, 2, table)


def make_function(spec: CorpusSpec | str) -> PartialFunction:
    if isinstance(spec, str):
        spec = parse_spec(spec)
    family, n = spec.family, spec.n
    if family == "EQ":
        return _bit_function(n, lambda x, y: 1 if x == y else 0)
    if family == "GT":
        return _bit_function(n, lambda x, y: 1 if x > y else 0)
    if family == "DISJ":
        return _bit_function(n, lambda x, y: 1 if (x & y) == 0 else 0)
    if family == "IP":
        return _bit_function(n, lambda x, y: bin(x & y).count("1") % 2)
    if family == "AND":
        return _bit_function(1, lambda x, y: x & y)
    if family == "CONST":
        z = n
        if z not in (0, 1):
            raise ParameterError("CONST takes the constant value 0 or 1")
        return PartialFunction(2, 2, 2, ((z, z), (z, z)))
    if family == "GHD":
        g = int(spec.extra) if spec.extra is not None else 1
        if g < 1:
            raise ParameterError("GHD gap must be a positive integer")

        def ghd(x: int, y: int) -> int | None:
            d = bin(x ^ y).count("1")
            if d >= n / 2 + g:
                return 1
            if d <= n / 2 - g:
                return 0
            return None

        return _bit_function(n, ghd)
    raise ParameterError(f"unknown function family {family!r}")


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------


def make_distribution(kind: str, f: PartialFunction) -> InputDistribution:
    if kind == "uniform":
        w = Fraction(1, f.x_size * f.y_size)
        return InputDistribution(
            tuple(tuple(w for _ in range(f.y_size)) for _ in range(f.x_size))
        )
    if kind == "uniform_on_domain":
        cells = f.domain()
        if not cells:
            raise DegenerateInputError("function has an empty promise set")
        w = Fraction(1, len(cells))
        mass = [[Fraction(0)] * f.y_size for _ in range(f.x_size)]
        for x, y in cells:
            mass[x][y] = w
        return InputDistribution(tuple(tuple(row) for row in mass))
    raise ParameterError(f"unknown distribution kind {kind!r}")


# ---------------------------------------------------------------------------
# Protocols
# ---------------------------------------------------------------------------


def _exchange_tree(n: int, f: PartialFunction | None, x_prefix: int, y_prefix: int,
                   a_left: int, b_left: int, size: int):
    if a_left > 0:
        # Alice sends her next most significant bit, deterministically.  The
        # table indexes the full input; inputs inconsistent with the prefix
        # never reach this node, so their entries are harmless.
        bit = a_left - 1
        p1 = tuple(Fraction((x >> bit) & 1) for x in range(size))
        return Node(
            "A", p1,
            _exchange_tree(n, f, x_prefix << 1, y_prefix, a_left - 1, b_left, size),
            _exchange_tree(n, f, (x_prefix << 1) | 1, y_prefix, a_left - 1, b_left, size),
        )
    if b_left > 0:
        bit = b_left - 1
        p1 = tuple(Fraction((y >> bit) & 1) for y in range(size))
        return Node(
            "B", p1,
            _exchange_tree(n, f, x_prefix, y_prefix << 1, 0, b_left - 1, size),
            _exchange_tree(n, f, x_prefix, (y_prefix << 1) | 1, 0, b_left - 1, size),
        )
    if f is None:
        return Leaf(0)
    z = f.value(x_prefix, y_prefix)
    return Leaf(z if z is not None else 0)


def make_protocol(kind: str, *, n: int = 1, z: int = 1, flip: float = 0.25,
                  f: PartialFunction | None = None) -> ProtocolTree:
    """Named protocol trees.

    trivial_const: depth 0, outputs z.  send_x: Alice announces her bit.
    noisy_bit: Alice announces her bit flipped with probability ``flip``.
    exchange_all: both parties announce all n bits; the leaf outputs f's
    value there (0 off the promise).  and_protocol: exchange_all on AND.
    """
    if kind == "trivial_const":
        return ProtocolTree(Leaf(z), 2, 2, 2)
    if kind == "send_x":
        return ProtocolTree(
            Node("A", (Fraction(0), Fraction(1)), Leaf(0), Leaf(1)), 2, 2, 2
        )
    if kind == "noisy_bit":
        if not (0 <= flip <= 1):
            raise ParameterError("flip probability must lie in [0, 1]")
        return ProtocolTree(Node("A", (flip, 1 - flip), Leaf(0), Leaf(1)), 2, 2, 2)
    if kind == "exchange_all":
        if f is not None:
            size = f.x_size
            bits = size.bit_length() - 1
            if 2**bits != size or f.y_size != size:
                raise ParameterError("exchange_all needs a 2^n x 2^n function")
            n = bits
        size = 2**n
        root = _exchange_tree(n, f, 0, 0, n, n, size)
        z_size = f.z_size if f is not None else 1
        return ProtocolTree(root, size, size, z_size)
    if kind == "and_protocol":
        from_f = make_function(CorpusSpec("AND", 1))
        return make_protocol("exchange_all", f=from_f)
    raise ParameterError(f"unknown protocol kind {kind!r}")


# ---------------------------------------------------------------------------
# The standard eight-function corpus and test triples
# ---------------------------------------------------------------------------


def corpus_functions() -> list[tuple[str, PartialFunction]]:
    specs = [
        ("CONST,1", CorpusSpec("CONST", 1)),
        ("AND,1", CorpusSpec("AND", 1)),
        ("EQ,1", CorpusSpec("EQ", 1)),
        ("EQ,2", CorpusSpec("EQ", 2)),
        ("GT,2", CorpusSpec("GT", 2)),
        ("DISJ,2", CorpusSpec("DISJ", 2)),
        ("IP,2", CorpusSpec("IP", 2)),
        ("GHD,2,1", CorpusSpec("GHD", 2, 1)),
    ]
    return [(label, make_function(spec)) for label, spec in specs]


def corpus_triples() -> list[tuple[str, PartialFunction, InputDistribution, ProtocolTree]]:
    """(label, f, mu, pi) combinations with matching dimensions, used by the
    end-to-end information-cost and extraction checks."""
    triples = []
    for label, f in corpus_functions():
        mu = make_distribution("uniform", f)
        pi = make_protocol("exchange_all", f=f)
        triples.append((f"{label}/exchange_all", f, mu, pi))
    eq1 = make_function(CorpusSpec("EQ", 1))
    and1 = make_function(CorpusSpec("AND", 1))
    const1 = make_function(CorpusSpec("CONST", 1))
    mu2 = make_distribution("uniform", eq1)
    triples.append(("EQ,1/send_x", eq1, mu2, make_protocol("send_x")))
    triples.append(("EQ,1/noisy_bit", eq1, mu2, make_protocol("noisy_bit", flip=0.25)))
    triples.append(("CONST,1/trivial_const", const1, mu2, make_protocol("trivial_const", z=1)))
    triples.append(("AND,1/and_protocol", and1, mu2, make_protocol("and_protocol")))
    return triples
