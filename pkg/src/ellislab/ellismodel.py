"""Finite-level model of the Ellis action on fibres over the ell-adic odometer.

A point of Z_ell is a :class:`DigitStream` (least significant digit first).
Fibre points are parameterised by seed letters, and proximality is read off
coincidences of column compositions:

* over a non-integer point, two seeds are merged at level n when the
  composition of the first n column maps along the stream sends them to the
  same letter.  Newly read digits are applied on the outside,
  ``comp_n = c_{r_n} ∘ ... ∘ c_{r_1}``, so a merge at level n persists at every
  deeper level.
* over an integer point the fibre is two-sided: points are legal seed pairs
  ``(b, a)`` (``b`` left of the origin, ``a`` right of it) with ``a`` in the
  eventual image of the first column and ``b`` in that of the last column.
  Pairs sharing one side are asymptotic; otherwise a side merges at level n
  when some column word of length n identifies the two seeds.  For the left
  side a word digit d reads position ``-1 - p`` of the left half, i.e. index
  ``ell^n - 1 - p`` of theta^n(b), whose digits are ``ell - 1 - (digits of p)``.

Every stream is eventually periodic, so a non-merge is decidable; verdicts
record whether the negative answer is certified.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property

from .finsemi import (
    CapExceeded, FiniteSemigroup, IdealStructure, ReesStructure, StructureGroups,
    Transformation, compose, generate_semigroup, hclass, kernel, rees_decomposition,
    structure_groups,
)
from .substitution import (
    ColumnData, Substitution, column_maps, columns_of, fixed_point_prefix,
)

DEFAULT_LEVEL = 24


class StreamParseError(ValueError):
    pass


@dataclass(frozen=True)
class DigitStream:
    length: int
    prefix: tuple[int, ...]
    tail: str  # "zero" | "max" | "cycle"
    cycle: tuple[int, ...] = ()

    def __post_init__(self):
        if self.length < 2:
            raise ValueError("ell must be at least 2")
        if self.tail not in ("zero", "max", "cycle"):
            raise ValueError(f"unknown tail {self.tail!r}")
        for d in self.prefix + self.cycle:
            if not 0 <= d < self.length:
                raise ValueError(f"digit {d} out of range for ell = {self.length}")
        if self.tail == "cycle":
            if not self.cycle:
                raise ValueError("cyclic tail needs a nonempty period")
            if set(self.cycle) == {0}:
                object.__setattr__(self, "tail", "zero")
                object.__setattr__(self, "cycle", ())
            elif set(self.cycle) == {self.length - 1}:
                object.__setattr__(self, "tail", "max")
                object.__setattr__(self, "cycle", ())
        elif self.cycle:
            raise ValueError("only cyclic tails carry a period")

    @classmethod
    def zero(cls, ell: int) -> "DigitStream":
        return cls(ell, (), "zero")

    @classmethod
    def minus_one(cls, ell: int) -> "DigitStream":
        return cls(ell, (), "max")

    def digit(self, k: int) -> int:
        if k < len(self.prefix):
            return self.prefix[k]
        if self.tail == "zero":
            return 0
        if self.tail == "max":
            return self.length - 1
        return self.cycle[(k - len(self.prefix)) % len(self.cycle)]

    def digits(self, n: int) -> list[int]:
        return [self.digit(k) for k in range(n)]

    @property
    def is_integer(self) -> bool:
        return self.tail in ("zero", "max")

    @property
    def integer_value(self) -> int | None:
        if not self.is_integer:
            return None
        v = sum(d * self.length ** k for k, d in enumerate(self.prefix))
        if self.tail == "max":
            v -= self.length ** len(self.prefix)
        return v

    @property
    def period(self) -> int:
        return len(self.cycle) if self.tail == "cycle" else 1

    def __str__(self) -> str:
        tail = self.tail if self.tail != "cycle" else "cycle:" + ",".join(map(str, self.cycle))
        return f"digits={','.join(map(str, self.prefix))};tail={tail}"


def parse_stream(text: str, ell: int) -> DigitStream:
    """Parse ``digits=<d1,d2,...>;tail=<zero|max|cycle:d,...>``."""
    fields = {}
    for part in text.strip().split(";"):
        if "=" not in part:
            raise StreamParseError(f"bad digit-stream field {part!r}")
        k, v = part.split("=", 1)
        fields[k.strip()] = v.strip().strip("<>")
    if set(fields) != {"digits", "tail"}:
        raise StreamParseError("digit stream needs exactly 'digits' and 'tail'")

    def ints(s):
        s = s.strip()
        return tuple(int(t) for t in s.split(",")) if s else ()

    try:
        prefix = ints(fields["digits"])
        tail = fields["tail"]
        if tail.startswith("cycle:"):
            return DigitStream(ell, prefix, "cycle", ints(tail[len("cycle:"):]))
        return DigitStream(ell, prefix, tail)
    except ValueError as exc:
        raise StreamParseError(f"bad digit stream {text!r}: {exc}") from None


def column_composition(theta: Substitution, xi: DigitStream, n: int) -> Transformation:
    """c_{r_n} ∘ ... ∘ c_{r_1} for the first n digits r_1, r_2, ... of xi."""
    if n < 1:
        raise ValueError("level must be >= 1")
    cols = columns_of(theta)
    f = Transformation.identity(theta.size)
    for d in xi.digits(n):
        f = compose(cols[d], f)
    return f


@dataclass(frozen=True)
class ProximalVerdict:
    merged: bool
    level: int | None  # first merge level when merged
    max_level: int
    certified: bool  # True when a negative verdict can never turn positive

    def __str__(self) -> str:
        if self.merged:
            return f"Proximal(at level {self.level})"
        return f"NotMergedUpTo({self.max_level}){' [certified]' if self.certified else ''}"


def _first_merge_along(cols, a: int, b: int, xi: DigitStream) -> int | None:
    """Exact first merge level of (a, b) along xi, or None if never."""
    if a == b:
        return 1
    seen = set()
    x, y, n = a, b, 0
    while True:
        d = xi.digit(n)
        x, y, n = cols[d](x), cols[d](y), n + 1
        if x == y:
            return n
        if n >= len(xi.prefix):
            phase = (n - len(xi.prefix)) % xi.period
            state = (min(x, y), max(x, y), phase)
            if state in seen:
                return None
            seen.add(state)


def proximal(theta: Substitution, a: int, b: int, xi: DigitStream, N: int = DEFAULT_LEVEL) -> ProximalVerdict:
    cols = columns_of(theta)
    first = _first_merge_along(cols, a, b, xi)
    if first is not None and first <= N:
        return ProximalVerdict(True, first, N, True)
    return ProximalVerdict(False, None, N, first is None)


def merge_levels_along(theta: Substitution, a: int, b: int, xi: DigitStream, N: int) -> list[bool]:
    """merged[n-1] for n = 1..N, by recomputing each composition from scratch."""
    out = []
    for n in range(1, N + 1):
        f = column_composition(theta, xi, n)
        out.append(a == b or f(a) == f(b))
    return out


def mergeable_pairs(columns) -> set[tuple[int, int]]:
    """Unordered pairs {x, y} (x < y) identified by some column word."""
    n = columns[0].degree
    # backwards search from the diagonal through the pair graph
    preimage: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for x, y in itertools.combinations(range(n), 2):
        for c in columns:
            u, v = sorted((c(x), c(y)))
            preimage.setdefault((u, v), []).append((x, y))
    good = set()
    frontier = [p for x in range(n) for p in preimage.get((x, x), [])]
    while frontier:
        p = frontier.pop()
        if p in good:
            continue
        good.add(p)
        frontier.extend(preimage.get(p, []))
    return good


def word_merge_level(columns, a: int, b: int, N: int) -> int | None:
    """Least n <= N such that a column word of length n identifies a and b."""
    if a == b:
        return 1
    pairs = {(a, b)}
    for n in range(1, N + 1):
        nxt = set()
        for x, y in pairs:
            for c in columns:
                u, v = c(x), c(y)
                if u == v:
                    return n
                nxt.add((min(u, v), max(u, v)))
        if nxt == pairs:
            return None
        pairs = nxt
    return None


def eventual_image(f: Transformation) -> tuple[int, ...]:
    im = set(range(f.degree))
    while True:
        nxt = {f(x) for x in im}
        if nxt == im:
            return tuple(sorted(im))
        im = nxt


def legal_pairs(theta: Substitution, prefix_len: int | None = None) -> set[tuple[int, int]]:
    """Two-letter words of the language, harvested from a fixed-point prefix."""
    if prefix_len is None:
        prefix_len = min(theta.length ** 5, 10 ** 6)
    u, _ = fixed_point_prefix(theta, prefix_len)
    return set(zip(u, u[1:]))


@dataclass
class FiberModel:
    xi: DigitStream
    level: int
    two_sided: bool
    points: list
    merge_level: dict  # (i, j) index pair (i < j) -> level or None
    certified: dict  # (i, j) -> bool, for unmerged pairs
    alphabet: tuple[str, ...]

    @cached_property
    def proximal_pairs(self) -> list[tuple[int, int]]:
        return sorted(p for p, lv in self.merge_level.items() if lv is not None)

    def is_proximal(self, i: int, j: int) -> bool:
        return i == j or self.merge_level[(min(i, j), max(i, j))] is not None

    @cached_property
    def proximal_classes(self) -> list[list[int]]:
        """Connected components of the proximal relation."""
        parent = list(range(len(self.points)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in self.proximal_pairs:
            parent[find(i)] = find(j)
        classes: dict[int, list[int]] = {}
        for i in range(len(self.points)):
            classes.setdefault(find(i), []).append(i)
        return list(classes.values())

    @property
    def transitive(self) -> bool:
        n = len(self.points)
        return all(self.is_proximal(i, k)
                   for i, j, k in itertools.permutations(range(n), 3)
                   if self.is_proximal(i, j) and self.is_proximal(j, k))

    @property
    def singular(self) -> bool:
        return bool(self.proximal_pairs)

    @property
    def fully_certified(self) -> bool:
        return all(self.certified[p] for p, lv in self.merge_level.items() if lv is None)

    def non_transitive_witness(self):
        """(x, y, z) with x~y, y~z, x!~z certified; None if not available."""
        n = len(self.points)
        for i, j, k in itertools.permutations(range(n), 3):
            p = (min(i, k), max(i, k))
            if (self.is_proximal(i, j) and self.is_proximal(j, k)
                    and not self.is_proximal(i, k) and self.certified[p]):
                return (i, j, k)
        return None

    def point_label(self, i: int) -> str:
        p = self.points[i]
        if self.two_sided:
            return f"{self.alphabet[p[0]]}.{self.alphabet[p[1]]}"
        return self.alphabet[p]

    def to_json(self) -> dict:
        return {
            "xi": str(self.xi),
            "level": self.level,
            "two_sided": self.two_sided,
            "points": [self.point_label(i) for i in range(len(self.points))],
            "proximal_pairs": [[self.point_label(i), self.point_label(j), self.merge_level[(i, j)]]
                               for i, j in self.proximal_pairs],
            "proximal_classes": [[self.point_label(i) for i in c] for c in self.proximal_classes],
            "transitive": self.transitive,
            "singular": self.singular,
            "evidence": {
                "non_merges_certified": self.fully_certified,
                "model": ("two-sided legal seed pairs; asymptotic or column-word merge"
                          if self.two_sided else
                          "one-sided seeds; merge along the stream's column compositions"),
            },
        }


def integer_fiber_points(theta: Substitution, prefix_len: int | None = None) -> list[tuple[int, int]]:
    cols = columns_of(theta)
    right = set(eventual_image(cols[0]))
    left = set(eventual_image(cols[-1]))
    return sorted((b, a) for b, a in legal_pairs(theta, prefix_len) if a in right and b in left)


def fiber(theta: Substitution, xi: DigitStream, N: int = DEFAULT_LEVEL,
          prefix_len: int | None = None) -> FiberModel:
    cols = columns_of(theta)
    if xi.length != theta.length:
        raise ValueError("stream base differs from substitution length")
    if not xi.is_integer:
        points = list(range(theta.size))
        levels, cert = {}, {}
        for i, j in itertools.combinations(range(len(points)), 2):
            v = proximal(theta, i, j, xi, N)
            levels[(i, j)] = v.level
            cert[(i, j)] = v.certified
        return FiberModel(xi, N, False, points, levels, cert, theta.alphabet)
    points = integer_fiber_points(theta, prefix_len)
    mergeable = mergeable_pairs(cols)
    levels, cert = {}, {}
    for i, j in itertools.combinations(range(len(points)), 2):
        (b, a), (b2, a2) = points[i], points[j]
        if a == a2 or b == b2:
            lv = 1
        else:
            cands = [word_merge_level(cols, a, a2, N), word_merge_level(cols, b, b2, N)]
            cands = [c for c in cands if c is not None]
            lv = min(cands) if cands else None
        levels[(i, j)] = lv
        never = ((min(a, a2), max(a, a2)) not in mergeable
                 and (min(b, b2), max(b, b2)) not in mergeable)
        cert[(i, j)] = lv is None and never
    return FiberModel(xi, N, True, points, levels, cert, theta.alphabet)


def stream_semigroup(theta: Substitution, xi: DigitStream, N: int) -> FiniteSemigroup:
    """Semigroup generated by the columns whose digits occur in the first N digits."""
    cols = columns_of(theta)
    used = sorted(set(xi.digits(N)))
    return generate_semigroup([cols[d] for d in used])


def integer_fiber_semigroup(theta: Substitution, points: list[tuple[int, int]] | None = None):
    """Idempotent projections acting on the two-sided fibre over 0.

    R_phi: (b, a) -> (phi(a), a) keeps the right half and picks the left seed
    from it; L_psi: (b, a) -> (b, psi(b)) is the mirror.  phi, psi range over
    bijections that keep every image pair legal.  Returns (points,
    semigroup) with semigroup None when there are no such projections.
    """
    points = points if points is not None else integer_fiber_points(theta)
    pos = {p: k for k, p in enumerate(points)}
    rights = sorted({a for _, a in points})
    lefts = sorted({b for b, _ in points})
    gens = []
    if len(rights) == len(lefts) and len(points) > 1:
        for perm in itertools.permutations(lefts):
            phi = dict(zip(rights, perm))
            if all((phi[a], a) in pos for a in rights):
                gens.append(Transformation(tuple(pos[(phi[a], a)] for _, a in points)))
        for perm in itertools.permutations(rights):
            psi = dict(zip(lefts, perm))
            if all((b, psi[b]) in pos for b in lefts):
                gens.append(Transformation(tuple(pos[(b, psi[b])] for b, _ in points)))
    if not gens:
        return points, None
    return points, generate_semigroup(gens)


@dataclass(frozen=True)
class SingularClassification:
    singular_set_descriptor: str  # "Empty" | "IntegerOrbit" | "Other"
    countable: bool
    lsing_descriptor: str
    lsing_open: bool | None
    justification: str
    evidence: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return {
            "singular_set": self.singular_set_descriptor,
            "countable": self.countable,
            "lsing": self.lsing_descriptor,
            "lsing_open": self.lsing_open,
            "justification": self.justification,
            "evidence": self.evidence,
        }


def sample_streams(ell: int, sample_size: int, N: int, seed: int = 0) -> list[DigitStream]:
    """Cyclic streams of period <= 2 plus seeded pseudo-random ones, all non-integer."""
    out = [DigitStream(ell, (), "cycle", (d,)) for d in range(1, ell - 1)]
    out += [DigitStream(ell, (), "cycle", (d, e)) for d in range(ell) for e in range(ell) if d != e]
    rng = random.Random(seed)
    while len(out) < sample_size + (ell - 2) + ell * (ell - 1):
        prefix = tuple(rng.randrange(ell) for _ in range(N))
        cycle = tuple(rng.randrange(ell) for _ in range(rng.randint(1, 4)))
        s = DigitStream(ell, prefix, "cycle", cycle)
        if not s.is_integer:
            out.append(s)
    return out


def classify_singular(theta: Substitution, sample_size: int = 32, N: int = DEFAULT_LEVEL,
                      seed: int = 0, columns: ColumnData | None = None) -> SingularClassification:
    columns = columns or column_maps(theta)
    ell = theta.length
    integer_fibers = {str(xi): fiber(theta, xi, N) for xi in (DigitStream.zero(ell), DigitStream.minus_one(ell))}
    streams = sample_streams(ell, sample_size, N, seed)
    generic = {str(xi): fiber(theta, xi, N) for xi in streams}
    sing_int = sorted(k for k, f in integer_fibers.items() if f.singular)
    sing_gen = sorted(k for k, f in generic.items() if f.singular)
    evidence = {
        "level": N,
        "seed": seed,
        "sampled_streams": len(streams),
        "singular_integer_points": sing_int,
        "singular_sampled_points": sing_gen[:8],
        "singular_sampled_count": len(sing_gen),
    }
    if columns.bijective:
        regular_certified = all(not f.singular and f.fully_certified for f in generic.values())
        evidence["sampled_regular_certified"] = regular_certified
        if not sing_int:
            return SingularClassification(
                "Empty", True, "trivial subgroup {0}", False,
                "no fibre contains a proximal pair; the trivial subgroup of an "
                "uncountable odometer is not open", evidence)
        if regular_certified:
            return SingularClassification(
                "IntegerOrbit", True,
                "<Z-orbit differences> = Z, dense in Z_ell, not open", False,
                "singular points form the countable orbit of 0 in the uncountable "
                "odometer, so their difference group is countable and not open", evidence)
    return SingularClassification(
        "Other", False, "not determined", None,
        "sampled evidence only; no countability claim for non-bijective columns", evidence)


@dataclass(frozen=True)
class FiberKernel:
    semigroup: FiniteSemigroup
    ideals: IdealStructure
    rees: ReesStructure
    groups: StructureGroups


def fiber_kernel_structure(theta: Substitution, columns: ColumnData | None = None) -> FiberKernel:
    columns = columns or column_maps(theta)
    S = columns.column_semigroup
    ideals = kernel(S)
    rees = rees_decomposition(S, ideals=ideals)
    groups = structure_groups(S, ideals=ideals)
    if columns.bijective:
        assert len(ideals.kernel) == len(S) == len(rees.H) == columns.column_group_order
    if ideals.min_rank == 1:
        assert len(rees.H) == 1 and len(rees.Lambda) == 1
    return FiberKernel(S, ideals, rees, groups)


# -- product model over k fibres with disjoint supports ---------------------

def _encode(point, n):
    return sum(x * n ** j for j, x in enumerate(point))


def _decode(code, n, k):
    return tuple((code // n ** j) % n for j in range(k))


def tuple_map(maps, n: int) -> Transformation:
    """The coordinatewise action of (f_1, ..., f_k) on A^k."""
    k = len(maps)
    return Transformation(tuple(
        _encode(tuple(maps[j](x[j]) for j in range(k)), n)
        for x in (_decode(c, n, k) for c in range(n ** k))))


def coordinate_maps(f: Transformation, n: int, k: int) -> tuple[Transformation, ...]:
    """Recover (f_1, ..., f_k) from a coordinatewise map on A^k."""
    out = []
    for j in range(k):
        out.append(Transformation(tuple(
            _decode(f(_encode(tuple(x if i == j else 0 for i in range(k)), n)), n, k)[j]
            for x in range(n))))
    return tuple(out)


@dataclass(frozen=True)
class ProductModel:
    k: int
    n: int
    semigroup: FiniteSemigroup
    ideals: IdealStructure
    rees: ReesStructure
    groups: StructureGroups
    base: tuple[Transformation, ...]  # coordinate maps of the base idempotent

    @property
    def structure_group_order(self) -> int:
        return len(self.rees.H)

    def coords(self, i: int) -> tuple[Transformation, ...]:
        return coordinate_maps(self.semigroup.elements[i], self.n, self.k)


def product_fiber_model(theta: Substitution, k: int, cap: int = 100_000) -> ProductModel:
    if k < 1:
        raise ValueError("k must be >= 1")
    n = theta.size
    if n ** k > 4096:
        raise CapExceeded(n ** k, 4096)
    cols = columns_of(theta)
    gens = [tuple_map(choice, n) for choice in itertools.product(cols, repeat=k)]
    S = generate_semigroup(gens, cap=cap)
    ideals = kernel(S)
    rees = rees_decomposition(S, ideals=ideals)
    groups = structure_groups(S, ideals=ideals)
    base = coordinate_maps(S.elements[rees.base_idempotent], n, k)
    return ProductModel(k, n, S, ideals, rees, groups, base)


def support(model: ProductModel, i: int) -> frozenset[int]:
    """Coordinates where element i moves a point of the base idempotent's image."""
    maps = model.coords(i)
    out = set()
    for j, (f, e) in enumerate(zip(maps, model.base)):
        if any(f(x) != x for x in e.image_set()):
            out.add(j)
    return frozenset(out)


def shift_conjugate(model: ProductModel, i: int, a: int) -> int:
    """Conjugate element i by the cyclic coordinate shift j -> j + a (mod k)."""
    maps = model.coords(i)
    k = model.k
    shifted = tuple(maps[(j - a) % k] for j in range(k))
    return model.semigroup.index(tuple_map(shifted, model.n))


def disjoint_support_checks(model: ProductModel) -> dict:
    """Exhaustive commutation / support-union / shift checks on H."""
    S = model.semigroup
    H = hclass(S, model.ideals, model.rees.base_idempotent)
    supp = {h: support(model, h) for h in H}
    commute_fail = union_fail = shift_fail = pairs = 0
    for f, g in itertools.product(H, repeat=2):
        if supp[f] & supp[g]:
            continue
        pairs += 1
        fg, gf = S.product(f, g), S.product(g, f)
        if fg != gf:
            commute_fail += 1
        if supp[fg] != supp[f] | supp[g]:
            union_fail += 1
    for h in H:
        for a in range(model.k):
            c = shift_conjugate(model, h, a)
            if support(model, c) != frozenset((j + a) % model.k for j in supp[h]):
                shift_fail += 1
    return {"disjoint_pairs": pairs, "commute_failures": commute_fail,
            "union_failures": union_fail, "shift_failures": shift_fail}
