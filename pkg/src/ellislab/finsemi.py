"""Finite transformation semigroups: closure, kernel, Rees coordinates.

Composition convention, used everywhere in the package:
``compose(f, g)(x) == f(g(x))`` and ``S.product(i, j)`` is the index of
``elements[i] ∘ elements[j]``.  All indices are zero-based.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DEFAULT_CAP = 100_000
TABLE_LIMIT = 2048  # build the full multiplication table up to this size


class DegreeMismatch(ValueError):
    pass


class CapExceeded(RuntimeError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"semigroup exceeds element cap {cap} (enumerated {count} so far)")
        self.count = count
        self.cap = cap


class NotMinimalIdempotent(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Transformation:
    """A self-map of ``{0, ..., degree-1}``; ``images[x]`` is the image of x."""

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(v) for v in self.images)
        object.__setattr__(self, "images", images)
        n = len(images)
        if n == 0:
            raise ValueError("transformation needs degree >= 1")
        for v in images:
            if not 0 <= v < n:
                raise ValueError(f"image {v} out of range for degree {n}")

    @classmethod
    def identity(cls, n: int) -> "Transformation":
        return cls(tuple(range(n)))

    @classmethod
    def constant(cls, n: int, value: int) -> "Transformation":
        return cls((value,) * n)

    @property
    def degree(self) -> int:
        return len(self.images)

    @property
    def rank(self) -> int:
        return len(set(self.images))

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __matmul__(self, other: "Transformation") -> "Transformation":
        return compose(self, other)

    def is_idempotent(self) -> bool:
        im = self.images
        return all(im[v] == v for v in im)

    def is_permutation(self) -> bool:
        return self.rank == self.degree

    def image_set(self) -> frozenset[int]:
        return frozenset(self.images)

    def kernel_partition(self) -> tuple[tuple[int, ...], ...]:
        blocks: dict[int, list[int]] = {}
        for x, v in enumerate(self.images):
            blocks.setdefault(v, []).append(x)
        return tuple(sorted(tuple(b) for b in blocks.values()))

    def __str__(self) -> str:
        return format_transformation(self)


def compose(f: Transformation, g: Transformation) -> Transformation:
    """Return ``f ∘ g``, i.e. the map ``x -> f(g(x))``."""
    if f.degree != g.degree:
        raise DegreeMismatch(f"cannot compose degree {f.degree} with degree {g.degree}")
    fi = f.images
    return Transformation(tuple(fi[y] for y in g.images))


def parse_transformation(text: str) -> Transformation:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError(f"transformation literal must look like [i0,i1,...]: {text!r}")
    body = text[1:-1].strip()
    if not body:
        raise ValueError("empty transformation literal")
    try:
        return Transformation(tuple(int(tok) for tok in body.split(",")))
    except ValueError as exc:
        raise ValueError(f"bad transformation literal {text!r}: {exc}") from None


def parse_generators(text: str) -> list[Transformation]:
    """Parse ``"[0,0,1],[1,2,0]"`` into a list of transformations."""
    out = []
    depth = 0
    start = None
    for pos, ch in enumerate(text):
        if ch == "[":
            if depth:
                raise ValueError(f"nested bracket at column {pos + 1}")
            depth, start = 1, pos
        elif ch == "]":
            if not depth:
                raise ValueError(f"unmatched ']' at column {pos + 1}")
            depth = 0
            out.append(parse_transformation(text[start:pos + 1]))
        elif not depth and ch not in " ,\t\n":
            raise ValueError(f"unexpected {ch!r} at column {pos + 1}")
    if depth:
        raise ValueError("unterminated '['")
    if not out:
        raise ValueError("no generators given")
    return out


def format_transformation(f: Transformation) -> str:
    return "[" + ",".join(map(str, f.images)) + "]"


class _Index:
    """Vectorised lookup of image arrays to element indices."""

    def __init__(self, images: np.ndarray):
        n = images.shape[1]
        # pack rows into int64 codes, several columns per code
        per = max(1, int(62 // max(1.0, np.log2(max(n, 2)))))
        self._chunks = [(lo, min(n, lo + per)) for lo in range(0, n, per)]
        self._pows = [n ** np.arange(hi - lo, dtype=np.int64) for lo, hi in self._chunks]
        codes = self._codes(images)
        if codes.shape[1] == 1:
            codes = codes[:, 0]
            self._order = np.argsort(codes, kind="stable")
            self._sorted = codes[self._order]
        self._codes_all = codes

    def _codes(self, rows: np.ndarray) -> np.ndarray:
        rows = rows.astype(np.int64)
        return np.stack([rows[:, lo:hi] @ pw for (lo, hi), pw in zip(self._chunks, self._pows)],
                        axis=1)

    def __call__(self, rows: np.ndarray) -> np.ndarray:
        """Indices of each row of ``rows`` (shape (..., n)); -1 if absent."""
        shape = rows.shape[:-1]
        codes = self._codes(rows.reshape(-1, rows.shape[-1]))
        if codes.shape[1] == 1:
            codes = codes[:, 0]
            pos = np.searchsorted(self._sorted, codes)
            pos = np.minimum(pos, len(self._sorted) - 1)
            found = self._sorted[pos] == codes
            out = np.where(found, self._order[pos], -1)
        else:
            N = len(self._codes_all)
            _, inv = np.unique(np.concatenate([self._codes_all, codes]), axis=0, return_inverse=True)
            inv = inv.reshape(-1)
            owner = np.full(inv.max() + 1, -1, dtype=np.int64)
            owner[inv[:N]] = np.arange(N)
            out = owner[inv[N:]]
        return out.reshape(shape)


class FiniteSemigroup:
    """Closure of a generator list under composition.

    Elements are enumerated breadth-first: generators first (deduplicated, in
    the given order), then for each element in enumeration order, its
    products ``element ∘ g`` for every generator ``g`` in order.  Since every
    element is reached as a word in the generators, ``word(i)`` recovers one
    shortest such word.
    """

    def __init__(self, gens: Sequence[Transformation], cap: int = DEFAULT_CAP):
        if not gens:
            raise ValueError("need at least one generator")
        n = gens[0].degree
        for g in gens:
            if g.degree != n:
                raise DegreeMismatch(f"generators of degree {n} and {g.degree}")
        self.degree = n
        self.cap = cap
        elements: list[tuple[int, ...]] = []
        index: dict[tuple[int, ...], int] = {}
        parent: list[tuple[int, int] | None] = []
        gen_idx = []
        for g in gens:
            im = g.images
            if im not in index:
                index[im] = len(elements)
                elements.append(im)
                parent.append(None)
                if len(elements) > cap:
                    raise CapExceeded(len(elements), cap)
            gen_idx.append(index[im])
        queue = deque(range(len(elements)))
        gimages = [g.images for g in gens]
        while queue:
            i = queue.popleft()
            left = elements[i]
            for k, gim in enumerate(gimages):
                h = tuple(left[y] for y in gim)
                if h not in index:
                    index[h] = len(elements)
                    elements.append(h)
                    parent.append((i, k))
                    queue.append(index[h])
                    if len(elements) > cap:
                        raise CapExceeded(len(elements), cap)
        self._index = index
        self._parent = parent
        self.generators = tuple(gen_idx)
        self.gens = tuple(gens)
        self.elements = tuple(Transformation(e) for e in elements)
        self.images = np.array(elements, dtype=np.int64)
        self._lookup = _Index(self.images)
        self._table: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"FiniteSemigroup(degree={self.degree}, size={len(self)})"

    def index(self, f: Transformation | Sequence[int]) -> int:
        im = f.images if isinstance(f, Transformation) else tuple(f)
        return self._index[im]

    def __contains__(self, f) -> bool:
        im = f.images if isinstance(f, Transformation) else tuple(f)
        return im in self._index

    def product(self, i: int, j: int) -> int:
        if self._table is not None:
            return int(self._table[i, j])
        a, b = self.elements[i].images, self.elements[j].images
        return self._index[tuple(a[y] for y in b)]

    def left_multiples(self, x: int) -> np.ndarray:
        """Indices of ``s ∘ x`` for every element ``s``."""
        return self._lookup(self.images[:, self.images[x]])

    def right_multiples(self, x: int) -> np.ndarray:
        """Indices of ``x ∘ s`` for every element ``s``."""
        return self._lookup(self.images[x][self.images])

    def lookup(self, rows: np.ndarray) -> np.ndarray:
        return self._lookup(rows)

    @property
    def table(self) -> np.ndarray:
        """Full multiplication table; ``table[i, j] = product(i, j)``."""
        if self._table is None:
            N, n = self.images.shape
            table = np.empty((N, N), dtype=np.int64)
            chunk = max(1, 2_000_000 // max(1, N * n))
            for lo in range(0, N, chunk):
                rows = self.images[lo:lo + chunk]
                table[lo:lo + chunk] = self._lookup(rows[:, self.images])
            self._table = table
        return self._table

    def word(self, i: int) -> list[int]:
        """Generator positions w with elements[i] = gens[w0] ∘ gens[w1] ∘ ..."""
        out = []
        node = self._parent[i]
        while node is not None:
            i, k = node
            out.append(k)
            node = self._parent[i]
        out.append(self.gens.index(self.elements[i]))
        return out[::-1]

    def multiply_all(self, idx: Iterable[int]) -> int:
        idx = list(idx)
        acc = idx[0]
        for j in idx[1:]:
            acc = self.product(acc, j)
        return acc


def generate_semigroup(gens: Sequence[Transformation], cap: int = DEFAULT_CAP) -> FiniteSemigroup:
    return FiniteSemigroup(gens, cap=cap)


def idempotents(S: FiniteSemigroup) -> list[int]:
    im = S.images
    squares = im[np.arange(len(S))[:, None], im]
    return [int(i) for i in np.flatnonzero((squares == im).all(axis=1))]


@dataclass(frozen=True)
class IdealStructure:
    kernel: tuple[int, ...]
    minimal_left_ideals: tuple[tuple[int, ...], ...]
    minimal_right_ideals: tuple[tuple[int, ...], ...]
    minimal_idempotents: tuple[int, ...]
    min_rank: int

    def left_of(self, x: int) -> int:
        return next(k for k, L in enumerate(self.minimal_left_ideals) if x in L)

    def right_of(self, x: int) -> int:
        return next(k for k, R in enumerate(self.minimal_right_ideals) if x in R)


def _dedupe_ideals(rows: list[tuple[int, np.ndarray]]) -> tuple[tuple[int, ...], ...]:
    seen: dict[frozenset, tuple[int, ...]] = {}
    for _, row in rows:
        key = frozenset(int(v) for v in row)
        if key not in seen:
            seen[key] = tuple(sorted(key))
    return tuple(seen.values())


def kernel(S: FiniteSemigroup, check: bool = True) -> IdealStructure:
    """Minimal two-sided ideal of S with its minimal one-sided ideals.

    For a transformation semigroup the kernel is exactly the set of
    elements of minimal rank.
    """
    ranks = np.array([e.rank for e in S.elements])
    r = int(ranks.min())
    K = tuple(int(i) for i in np.flatnonzero(ranks == r))
    kset = set(K)
    if len(S) <= TABLE_LIMIT:
        T = S.table
        lefts = [(x, T[:, x]) for x in K]
        rights = [(x, T[x, :]) for x in K]
    else:
        lefts = [(x, S.left_multiples(x)) for x in K]
        rights = [(x, S.right_multiples(x)) for x in K]
    if check:
        for _, row in lefts + rights:
            if not kset.issuperset(int(v) for v in row):
                raise AssertionError("minimal-rank set is not a two-sided ideal")
    Ls = _dedupe_ideals(lefts)
    Rs = _dedupe_ideals(rights)
    J = tuple(i for i in K if S.elements[i].is_idempotent())
    if check:
        for e in J:
            Se = np.unique(S.left_multiples(e))
            if len(S) <= TABLE_LIMIT:
                SeS = set(np.unique(S.table[Se, :]).tolist())
            else:
                SeS = set()
                for y in Se:
                    SeS.update(S.right_multiples(int(y)).tolist())
            if SeS != kset:
                raise AssertionError(f"S e S != kernel for e = {e}")
    return IdealStructure(K, Ls, Rs, J, r)


def kernel_by_principal_ideals(S: FiniteSemigroup) -> set[int]:
    """Generic oracle: the smallest principal two-sided ideal S^1 x S^1.

    Uses only the multiplication table, not ranks.
    """
    T = S.table
    best = None
    for x in range(len(S)):
        left = set(T[:, x].tolist()) | {x}
        ideal = set(left)
        for y in left:
            ideal.update(T[y, :].tolist())
        if best is None or len(ideal) < len(best):
            best = ideal
    return best


@dataclass(frozen=True)
class ReesStructure:
    base_idempotent: int
    I: tuple[tuple[int, ...], ...]
    Lambda: tuple[tuple[int, ...], ...]
    H: tuple[int, ...]
    sandwich: tuple[tuple[int, ...], ...]
    coords: dict
    right_reps: tuple[int, ...]
    left_reps: tuple[int, ...]

    def element(self, S: FiniteSemigroup, i: int, g: int, lam: int) -> int:
        """Inverse of ``coords``: r_i ∘ g ∘ q_lam."""
        return S.product(S.product(self.right_reps[i], g), self.left_reps[lam])

    def multiply(self, S: FiniteSemigroup, a: tuple, b: tuple) -> tuple:
        i, g, lam = a
        j, h, mu = b
        return (i, S.product(S.product(g, self.sandwich[lam][j]), h), mu)

    @property
    def kernel_size(self) -> int:
        return sum(len(r) for r in self.I)


def _check_minimal_idempotent(S: FiniteSemigroup, ideals: IdealStructure, e: int):
    if e not in ideals.minimal_idempotents:
        raise NotMinimalIdempotent(f"element {e} is not a minimal idempotent")


def _hclass_idempotent(S, ideals, R, L) -> int:
    cell = set(R) & set(L)
    found = [p for p in ideals.minimal_idempotents if p in cell]
    if len(found) != 1:
        raise AssertionError(f"H-class contains {len(found)} idempotents")
    return found[0]


def rees_decomposition(S: FiniteSemigroup, e: int | None = None,
                       ideals: IdealStructure | None = None) -> ReesStructure:
    """Coordinatise the kernel as I x H x Lambda around the idempotent ``e``.

    For each minimal right ideal R_i we use the idempotent r_i of R_i ∩ L_e,
    for each minimal left ideal L_lam the idempotent q_lam of R_e ∩ L_lam.
    Then x = r_i (e x e) q_lam and the sandwich entry is a[lam][i] = q_lam r_i.
    """
    ideals = ideals or kernel(S)
    if e is None:
        e = ideals.minimal_idempotents[0]
    _check_minimal_idempotent(S, ideals, e)
    Rs, Ls = ideals.minimal_right_ideals, ideals.minimal_left_ideals
    ie, le = ideals.right_of(e), ideals.left_of(e)
    r = tuple(_hclass_idempotent(S, ideals, R, Ls[le]) for R in Rs)
    q = tuple(_hclass_idempotent(S, ideals, Rs[ie], L) for L in Ls)
    H = tuple(sorted(set(Rs[ie]) & set(Ls[le])))
    sandwich = tuple(tuple(S.product(q[lam], r[i]) for i in range(len(Rs)))
                     for lam in range(len(Ls)))
    right_of = {x: i for i, R in enumerate(Rs) for x in R}
    left_of = {x: k for k, L in enumerate(Ls) for x in L}
    coords = {}
    for x in ideals.kernel:
        g = S.product(S.product(e, x), e)
        coords[x] = (right_of[x], g, left_of[x])
    return ReesStructure(e, Rs, Ls, H, sandwich, coords, r, q)


def rees_mismatches(S: FiniteSemigroup, rees: ReesStructure) -> list[tuple[int, int]]:
    """Kernel pairs whose product is not reproduced by the Rees law.

    Products are recomputed by direct composition of transformations.
    """
    back = {c: x for x, c in rees.coords.items()}
    bad = []
    for x, y in itertools.product(rees.coords, repeat=2):
        actual = compose(S.elements[x], S.elements[y])
        predicted = back.get(rees.multiply(S, rees.coords[x], rees.coords[y]))
        if predicted is None or S.elements[predicted] != actual:
            bad.append((x, y))
    return bad


@dataclass(frozen=True)
class StructureGroups:
    e: int
    H_e: tuple[int, ...]
    Gamma_e: tuple[int, ...]
    orthodox: bool
    witness: tuple[int, int] | None = None

    @property
    def gamma_trivial(self) -> bool:
        return len(self.Gamma_e) == 1


def subgroup_closure(S: FiniteSemigroup, gens: Iterable[int]) -> tuple[int, ...]:
    # finite: closure under products is already a subgroup
    found = list(dict.fromkeys(gens))
    seen = set(found)
    k = 0
    while k < len(found):
        a = found[k]
        for b in list(found):
            for c in (S.product(a, b), S.product(b, a)):
                if c not in seen:
                    seen.add(c)
                    found.append(c)
        k += 1
    return tuple(sorted(seen))


def structure_groups(S: FiniteSemigroup, e: int | None = None,
                     ideals: IdealStructure | None = None) -> StructureGroups:
    ideals = ideals or kernel(S)
    if e is None:
        e = ideals.minimal_idempotents[0]
    _check_minimal_idempotent(S, ideals, e)
    im = S.images
    efe = im[e][im[:, im[e]]]
    H = tuple(sorted(set(int(v) for v in S.lookup(efe))))
    J = ideals.minimal_idempotents
    gamma = subgroup_closure(S, (S.multiply_all((e, p, e)) for p in J))
    witness = None
    for p, q in itertools.product(J, repeat=2):
        if not S.elements[S.product(p, q)].is_idempotent():
            witness = (p, q)
            break
    orthodox = witness is None
    if orthodox != (len(gamma) == 1):
        raise AssertionError("little structure group triviality disagrees with orthodoxy")
    return StructureGroups(e, H, gamma, orthodox, witness)


def is_group_isomorphism(S: FiniteSemigroup, mapping: dict[int, int]) -> bool:
    if len(set(mapping.values())) != len(mapping):
        return False
    for a, b in itertools.product(mapping, repeat=2):
        ab = S.product(a, b)
        if ab not in mapping or mapping[ab] != S.product(mapping[a], mapping[b]):
            return False
    return True


def hclass(S: FiniteSemigroup, ideals: IdealStructure, p: int) -> tuple[int, ...]:
    R = ideals.minimal_right_ideals[ideals.right_of(p)]
    L = ideals.minimal_left_ideals[ideals.left_of(p)]
    return tuple(sorted(set(R) & set(L)))


def hclass_map(S: FiniteSemigroup, p: int, q: int,
               ideals: IdealStructure | None = None) -> dict[int, int]:
    """The map x -> r x q from H_p to H_q, r the idempotent of R_q ∩ L_p.

    x -> r x moves H_p to H_r inside L_p, then y -> y q moves H_r to H_q
    inside R_q.
    """
    ideals = ideals or kernel(S)
    for x in (p, q):
        _check_minimal_idempotent(S, ideals, x)
    r = _hclass_idempotent(S, ideals,
                           ideals.minimal_right_ideals[ideals.right_of(q)],
                           ideals.minimal_left_ideals[ideals.left_of(p)])
    return {x: S.product(S.product(r, x), q) for x in hclass(S, ideals, p)}


def hclass_isomorphism_check(S: FiniteSemigroup, p: int, q: int,
                             ideals: IdealStructure | None = None) -> bool:
    ideals = ideals or kernel(S)
    mapping = hclass_map(S, p, q, ideals)
    target = set(hclass(S, ideals, q))
    return set(mapping.values()) == target and is_group_isomorphism(S, mapping)


@dataclass
class KernelLawReport:
    passed: bool
    checked_pairs: int
    violations: list = field(default_factory=list)


def verify_kernel_laws(S: FiniteSemigroup, ideals: IdealStructure | None = None) -> KernelLawReport:
    ideals = ideals or kernel(S)
    J = ideals.minimal_idempotents
    left = {p: ideals.left_of(p) for p in J}
    right = {p: ideals.right_of(p) for p in J}
    bad = []
    for p, q in itertools.product(J, repeat=2):
        pq = S.product(p, q)
        if left[p] == left[q] and pq != p:
            bad.append(("left", p, q, pq))
        if right[p] == right[q] and pq != q:
            bad.append(("right", p, q, pq))
    for R in ideals.minimal_right_ideals:
        for L in ideals.minimal_left_ideals:
            cell = sorted(set(R) & set(L))
            ids = [x for x in cell if x in left]
            if len(ids) != 1:
                bad.append(("cell-idempotents", tuple(cell), tuple(ids)))
                continue
            e = ids[0]
            closed = all(S.product(a, b) in cell for a in cell for b in cell)
            unit = all(S.product(e, a) == a == S.product(a, e) for a in cell)
            inverses = all(any(S.product(a, b) == e for b in cell) for a in cell)
            if not (closed and unit and inverses):
                bad.append(("cell-not-group", tuple(cell)))
    return KernelLawReport(not bad, len(J) ** 2, bad)


def semigroup_to_json(S: FiniteSemigroup, ideals: IdealStructure | None = None,
                      rees: ReesStructure | None = None,
                      groups: StructureGroups | None = None) -> dict:
    ideals = ideals or kernel(S)
    out = {
        "degree": S.degree,
        "elements": [list(e.images) for e in S.elements],
        "generators": list(S.generators),
        "kernel": list(ideals.kernel),
        "minimal_idempotents": list(ideals.minimal_idempotents),
    }
    if rees is not None:
        out["rees"] = {
            "base_idempotent": rees.base_idempotent,
            "I": [list(R) for R in rees.I],
            "Lambda": [list(L) for L in rees.Lambda],
            "H": list(rees.H),
            "sandwich": [list(row) for row in rees.sandwich],
            "coords": {str(x): list(c) for x, c in sorted(rees.coords.items())},
        }
    if groups is not None:
        out["structure_groups"] = {
            "e": groups.e,
            "H_e": list(groups.H_e),
            "Gamma_e": list(groups.Gamma_e),
            "orthodox": groups.orthodox,
            "non_orthodox_witness": list(groups.witness) if groups.witness else None,
        }
    return out
