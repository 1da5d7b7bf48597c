"""Constant-length substitutions and their combinatorial invariants.

Input format (line oriented)::

    alphabet: a b
    a -> a b      # comment
    b -> b a

The ``alphabet:`` line is optional (rule heads then define the alphabet in
order), and ``/`` may separate rules on one line, so ``"a -> a b / b -> b a"``
is accepted.  ``/`` and ``#`` are therefore not usable as symbols.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .finsemi import DEFAULT_CAP, FiniteSemigroup, Transformation, compose, generate_semigroup


class SubstitutionError(ValueError):
    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + msg)
        self.line = line
        self.column = column


class HypothesisError(ValueError):
    """Raised when an operation's dynamical hypotheses are not met."""


@dataclass(frozen=True)
class Substitution:
    alphabet: tuple[str, ...]
    rules: tuple[tuple[str, ...], ...]  # rules[k] is the image word of alphabet[k]

    def __post_init__(self):
        if not self.alphabet:
            raise SubstitutionError("empty alphabet")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise SubstitutionError("repeated alphabet symbol")
        if len(self.rules) != len(self.alphabet):
            raise SubstitutionError("need exactly one rule per letter")
        lengths = {len(w) for w in self.rules}
        if len(lengths) != 1:
            raise SubstitutionError(f"rules have unequal lengths {sorted(lengths)}")
        if lengths.pop() < 2:
            raise SubstitutionError("length must be at least 2")
        known = set(self.alphabet)
        for w in self.rules:
            for s in w:
                if s not in known:
                    raise SubstitutionError(f"symbol {s!r} not in alphabet")

    @classmethod
    def from_dict(cls, rules: dict[str, str | list[str]]) -> "Substitution":
        alphabet = tuple(rules)
        words = tuple(tuple(w.split()) if isinstance(w, str) else tuple(w) for w in rules.values())
        return cls(alphabet, words)

    @property
    def length(self) -> int:
        return len(self.rules[0])

    @property
    def size(self) -> int:
        return len(self.alphabet)

    @cached_property
    def letter_index(self) -> dict[str, int]:
        return {a: k for k, a in enumerate(self.alphabet)}

    @cached_property
    def int_rules(self) -> tuple[tuple[int, ...], ...]:
        idx = self.letter_index
        return tuple(tuple(idx[s] for s in w) for w in self.rules)

    def apply(self, word):
        """Image of a word given as a sequence of letter indices."""
        rules = self.int_rules
        return [s for a in word for s in rules[a]]

    def power(self, n: int) -> "Substitution":
        words = [[k] for k in range(self.size)]
        for _ in range(n):
            words = [self.apply(w) for w in words]
        return Substitution(self.alphabet, tuple(tuple(self.alphabet[s] for s in w) for w in words))

    def __str__(self) -> str:
        return format_substitution(self)


def parse_substitution(text: str) -> Substitution:
    alphabet: list[str] | None = None
    heads: list[str] = []
    rules: dict[str, tuple[str, ...]] = {}
    where: dict[str, tuple[int, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if line.strip().startswith("alphabet:"):
            if alphabet is not None:
                raise SubstitutionError("duplicate alphabet line", lineno)
            alphabet = line.split(":", 1)[1].split()
            if not alphabet:
                raise SubstitutionError("empty alphabet", lineno)
            continue
        offset = 0
        for chunk in line.split("/"):
            col = offset + len(chunk) - len(chunk.lstrip()) + 1
            offset += len(chunk) + 1
            if not chunk.strip():
                continue
            if "->" not in chunk:
                raise SubstitutionError("expected '<letter> -> <word>'", lineno, col)
            lhs, rhs = chunk.split("->", 1)
            head = lhs.split()
            if len(head) != 1:
                raise SubstitutionError("rule must have exactly one letter on the left", lineno, col)
            a = head[0]
            if a in rules:
                raise SubstitutionError(f"duplicate rule for {a!r}", lineno, col)
            word = tuple(rhs.split())
            if not word:
                raise SubstitutionError(f"empty image for {a!r}", lineno, col)
            rules[a] = word
            heads.append(a)
            where[a] = (lineno, col)
    if not rules:
        raise SubstitutionError("empty input")
    if alphabet is None:
        alphabet = heads
    elif len(set(alphabet)) != len(alphabet):
        raise SubstitutionError("repeated alphabet symbol")
    known = set(alphabet)
    for a in heads:
        if a not in known:
            raise SubstitutionError(f"rule head {a!r} not in alphabet", *where[a])
    for a in alphabet:
        if a not in rules:
            raise SubstitutionError(f"no rule for letter {a!r}")
    lengths = {len(w) for w in rules.values()}
    if len(lengths) > 1:
        a = next(a for a in heads if len(rules[a]) != len(rules[heads[0]]))
        raise SubstitutionError(f"unequal rule lengths: {len(rules[heads[0]])} vs {len(rules[a])}", *where[a])
    for a in heads:
        for s in rules[a]:
            if s not in known:
                raise SubstitutionError(f"symbol {s!r} not in alphabet", *where[a])
    return Substitution(tuple(alphabet), tuple(rules[a] for a in alphabet))


def format_substitution(theta: Substitution) -> str:
    lines = ["alphabet: " + " ".join(theta.alphabet)]
    lines += [f"{a} -> {' '.join(w)}" for a, w in zip(theta.alphabet, theta.rules)]
    return "\n".join(lines) + "\n"


def incidence_matrix(theta: Substitution) -> np.ndarray:
    """M[a, b] = number of occurrences of b in theta(a)."""
    M = np.zeros((theta.size, theta.size), dtype=np.int64)
    for a, w in enumerate(theta.int_rules):
        for b in w:
            M[a, b] += 1
    return M


def primitivity_check(theta: Substitution) -> bool:
    B = (incidence_matrix(theta) > 0).astype(np.int64)
    P = B.copy()
    for _ in range(theta.size ** 2):
        if P.all():
            return True
        P = ((P @ B) > 0).astype(np.int64)
    return bool(P.all())


def fixed_point_seed(theta: Substitution) -> tuple[int, int]:
    """Smallest power p and letter a such that theta^p(a) starts with a."""
    first = [w[0] for w in theta.int_rules]
    best = None
    for a in range(theta.size):
        x = first[a]
        for p in range(1, theta.size + 1):
            if x == a:
                if best is None or p < best[0]:
                    best = (p, a)
                break
            x = first[x]
    assert best is not None  # the first-letter map always has a periodic point
    return best


def fixed_point_prefix(theta: Substitution, length: int) -> tuple[list[int], int]:
    """Prefix of a one-sided fixed point of theta^p; returns (prefix, p)."""
    p, a = fixed_point_seed(theta)
    word = [a]
    while len(word) < length:
        for _ in range(p):
            word = theta.apply(word)
    return word[:length], p


def factor_complexity(word, nmax: int) -> list[int]:
    w = tuple(word)
    return [len({w[i:i + n] for i in range(len(w) - n + 1)}) for n in range(1, nmax + 1)]


@dataclass(frozen=True)
class AperiodicityReport:
    aperiodic: bool
    prefix_len: int
    complexity: tuple[int, ...]
    plateau_at: int | None
    method: str = ("factor-complexity plateau on a fixed-point prefix; heuristic: "
                   "a run of length-n factor counts constant over a window of ell "
                   "consecutive n is read as eventual periodicity")


def aperiodicity_report(theta: Substitution, k: int = 6, max_prefix: int = 10 ** 6) -> AperiodicityReport:
    L = min(theta.length ** k, max_prefix)
    prefix, _ = fixed_point_prefix(theta, L)
    # past ~sqrt(L) the prefix no longer contains every factor
    nmax = max(theta.length + 1, math.isqrt(L))
    cx = factor_complexity(prefix, nmax)
    win = theta.length
    plateau = None
    for i in range(len(cx) - win + 1):
        if len(set(cx[i:i + win])) == 1:
            plateau = i + 1
            break
    return AperiodicityReport(plateau is None, L, tuple(cx), plateau)


def aperiodicity_check(theta: Substitution, k: int = 6) -> bool:
    return aperiodicity_report(theta, k).aperiodic


@dataclass(frozen=True)
class ColumnData:
    columns: tuple[Transformation, ...]
    bijective: bool
    column_semigroup: FiniteSemigroup = field(repr=False, compare=False)
    column_group_order: int | None


def columns_of(theta: Substitution) -> tuple[Transformation, ...]:
    rules = theta.int_rules
    return tuple(Transformation(tuple(rules[a][i] for a in range(theta.size)))
                 for i in range(theta.length))


def column_maps(theta: Substitution, cap: int = DEFAULT_CAP) -> ColumnData:
    cols = columns_of(theta)
    S = generate_semigroup(list(cols), cap=cap)
    bij = all(c.is_permutation() for c in cols)
    return ColumnData(cols, bij, S, len(S) if bij else None)


def word_composition(columns, digits) -> Transformation:
    """c_{d_1} ∘ c_{d_2} ∘ ... ∘ c_{d_n} for a digit list."""
    f = Transformation.identity(columns[0].degree)
    for d in digits:
        f = compose(f, columns[d])
    return f


def power_columns(theta: Substitution, n: int) -> tuple[Transformation, ...]:
    """Columns of theta^n from the columns of theta.

    Position p = sum r_j ell^(j-1) (r_1 least significant) of theta^n(a)
    holds c_{r_1} ∘ ... ∘ c_{r_n}(a).
    """
    cols = columns_of(theta)
    ell = theta.length
    out = []
    for p in range(ell ** n):
        digits = [(p // ell ** j) % ell for j in range(n)]
        out.append(word_composition(cols, digits))
    return tuple(out)


def _strip_primes_of(g: int, ell: int) -> int:
    for q in range(2, ell + 1):
        if ell % q == 0:
            while g % q == 0:
                g //= q
    return g


@dataclass(frozen=True)
class HeightReport:
    height: int
    power: int
    prefix_len: int
    return_gcd: int


def height_report(theta: Substitution, prefix_len: int | None = None) -> HeightReport:
    ell = theta.length
    if prefix_len is None:
        prefix_len = min(ell ** 4, 10 ** 6)
    if prefix_len < ell ** 2:
        raise ValueError(f"prefix_len must be at least ell^2 = {ell ** 2}")
    u, p = fixed_point_prefix(theta, prefix_len)
    g = 0
    for k in range(1, len(u)):
        if u[k] == u[0]:
            g = math.gcd(g, k)
    if g == 0:
        raise HypothesisError("first letter never recurs in the prefix")
    return HeightReport(_strip_primes_of(g, ell), p, prefix_len, g)


def dekking_height(theta: Substitution, prefix_len: int | None = None) -> int:
    return height_report(theta, prefix_len).height


def min_rank(S: FiniteSemigroup) -> int:
    return min(e.rank for e in S.elements)


def check_hypotheses(theta: Substitution) -> list[str]:
    failed = []
    if not primitivity_check(theta):
        failed.append("primitive")
        return failed
    if not aperiodicity_check(theta):
        failed.append("aperiodic")
        return failed
    if dekking_height(theta) != 1:
        failed.append("trivial height")
    return failed


def coincidence_rank(theta: Substitution, strict: bool = True, columns: ColumnData | None = None) -> int:
    """Minimal image size over the column semigroup.

    With ``strict`` the primitive / aperiodic / trivial-height hypotheses
    are checked and a failure raises HypothesisError.
    """
    if strict:
        failed = check_hypotheses(theta)
        if failed:
            raise HypothesisError("coincidence rank hypotheses fail: " + ", ".join(failed))
    columns = columns or column_maps(theta)
    return min_rank(columns.column_semigroup)


@dataclass(frozen=True)
class SubstitutionInvariants:
    primitive: bool
    aperiodic: bool
    height: int | None
    coincidence_rank: int
    mef_descriptor: str | None
    height_power: int | None = None
    complexity: tuple[int, ...] = ()


def invariants(theta: Substitution, columns: ColumnData | None = None,
               aperiodic_k: int = 6) -> SubstitutionInvariants:
    columns = columns or column_maps(theta)
    prim = primitivity_check(theta)
    ap = aperiodicity_report(theta, aperiodic_k)
    h = height_report(theta) if prim and ap.aperiodic else None
    cr = min_rank(columns.column_semigroup)
    mef = None
    if h is not None and h.height == 1:
        mef = f"Z_{theta.length} ({theta.length}-adic odometer)"
    elif h is not None:
        mef = f"Z_{theta.length} x Z/{h.height}Z"
    return SubstitutionInvariants(prim, ap.aperiodic, h.height if h else None, cr, mef,
                                  h.power if h else None, ap.complexity)


def substitution_report(theta: Substitution, columns: ColumnData | None = None,
                        inv: SubstitutionInvariants | None = None) -> dict:
    columns = columns or column_maps(theta)
    inv = inv or invariants(theta, columns)
    return {
        "length": theta.length,
        "alphabet": list(theta.alphabet),
        "columns": [list(c.images) for c in columns.columns],
        "bijective": columns.bijective,
        "column_group_order": columns.column_group_order,
        "column_semigroup_order": len(columns.column_semigroup),
        "primitive": inv.primitive,
        "aperiodic": inv.aperiodic,
        "complexity": list(inv.complexity),
        "height": inv.height,
        "height_power": inv.height_power,
        "coincidence_rank": inv.coincidence_rank,
        "mef": inv.mef_descriptor,
    }
