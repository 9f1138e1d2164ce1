"""Qualitative algebras as data.

A qualitative algebra is a finite set of jointly exhaustive, pairwise
disjoint base relations together with an identity element, an inverse
table, a composition table, and a conceptual neighborhood graph.  A
relation is any set of base relations, read disjunctively; it is encoded
here as a bit mask over the declaration order of the base relations.

Two algebras ship built in:

* ``allen`` -- Allen's 13 interval relations (b, bi, m, mi, o, oi, s, si,
  d, di, f, fi, eq) over closed rational intervals [Allen 1983].  The
  composition table was derived exactly from the endpoint-order semantics
  and the neighborhood graph connects relations reachable by moving a
  single interval endpoint.
* ``rcc8`` -- the 8 topological relations of the region connection
  calculus (dc, ec, po, tpp, ntpp, tppi, ntppi, eq) [Randell, Cui & Cohn
  1992], with the standard conceptual neighborhood.

Other algebras load from the same line-based document format::

    algebra <name>
    relations <tok> <tok> ...     # declaration order fixes bit indices
    identity <tok>
    inverse <tok1> <tok2>         # both directions; self-inverse: inverse eq eq
    table <first> <second> : <tok> ...   # '*' denotes the full relation
    neighbor <tok1> <tok2>        # undirected edge
    # comments run to end of line

Every ordered pair of base relations needs exactly one ``table`` line.
The operational reading of ``table r s : ...`` is: if x r y and y s z
then x (r composed with s) z.

The distance between two base relations is the length of the shortest
path in the neighborhood graph; it is precomputed for all pairs at load
time and is the building block of the scenario distance used by the
revision engine.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from .errors import (
    AlgebraError,
    DisconnectedNeighborGraph,
    DuplicateRelationName,
    IncompleteCompositionTable,
    MissingIdentity,
    NonInvolutiveInverse,
)

Relation = int  # bit mask over base-relation indices


def bits(mask: int) -> Iterator[int]:
    """Iterate the set bit indices of a relation mask, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return mask.bit_count()


def is_base(mask: int) -> bool:
    """True iff the mask holds exactly one base relation."""
    return mask != 0 and mask & (mask - 1) == 0


def base_index(mask: int) -> int:
    """Index of the single base relation in a singleton mask."""
    if not is_base(mask):
        raise ValueError(f"not a singleton relation mask: {mask:#x}")
    return mask.bit_length() - 1


@dataclass(frozen=True)
class BaseRelation:
    """One atomic relation of an algebra."""

    index: int
    name: str


@dataclass(frozen=True, eq=False)
class AlgebraSpec:
    """A fully validated qualitative algebra.

    Immutable after load; every operation is a pure function of its
    arguments, so instances are safe to share across threads.  Equality
    and hashing are by identity: load each algebra once and pass the
    instance around.
    """

    name: str
    base: tuple[BaseRelation, ...]
    identity: int  # base index of eq
    inverse_index: tuple[int, ...]  # per base index
    table: tuple[tuple[int, ...], ...]  # table[i][j] -> relation mask
    neighbor_edges: tuple[tuple[int, int], ...]
    dist_matrix: tuple[tuple[int, ...], ...]
    source_text: str
    assume_closure_decides: bool = True
    # caches, not part of the value
    _index_of: dict = field(init=False, repr=False, default_factory=dict)
    _compose_cache: dict = field(init=False, repr=False, default_factory=dict)
    _min_dist_cache: dict = field(init=False, repr=False, default_factory=dict)
    _inverse_cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        for rel in self.base:
            self._index_of[rel.name] = rel.index
            self._inverse_cache[1 << rel.index] = 1 << self.inverse_index[rel.index]

    @property
    def size(self) -> int:
        return len(self.base)

    @property
    def full(self) -> int:
        """The universal relation (all base relations)."""
        return (1 << len(self.base)) - 1

    @property
    def identity_mask(self) -> int:
        return 1 << self.identity

    def index_of(self, token: str) -> int:
        try:
            return self._index_of[token]
        except KeyError:
            raise KeyError(f"unknown base relation {token!r} in algebra {self.name!r}") from None

    def relation(self, *tokens: str) -> int:
        """Build a relation mask from base-relation names."""
        mask = 0
        for tok in tokens:
            mask |= 1 << self.index_of(tok)
        return mask

    def tokens(self, mask: int) -> list[str]:
        """Base-relation names of a mask, in declaration order."""
        return [self.base[i].name for i in bits(mask)]

    def inverse(self, rel: int) -> int:
        """Member-wise inverse of a relation."""
        cached = self._inverse_cache.get(rel)
        if cached is not None:
            return cached
        out = 0
        for i in bits(rel):
            out |= 1 << self.inverse_index[i]
        self._inverse_cache[rel] = out
        return out

    def complement(self, rel: int) -> int:
        """All base relations not in ``rel``."""
        return self.full & ~rel

    def compose(self, first: int, second: int) -> int:
        """Relation constraining (x, z) when x ``first`` y and y ``second`` z.

        Distributes the base-level table over unions; composing with the
        empty relation yields the empty relation.
        """
        key = (first, second)
        cached = self._compose_cache.get(key)
        if cached is not None:
            return cached
        out = 0
        table = self.table
        for i in bits(first):
            row = table[i]
            for j in bits(second):
                out |= row[j]
            if out == self.full:
                break
        self._compose_cache[key] = out
        return out

    def rel_distance(self, r1: int, r2: int) -> int:
        """Shortest-path length between two base relations (by index)."""
        return self.dist_matrix[r1][r2]

    def min_rel_distance(self, rel1: int, rel2: int) -> int:
        """Minimum neighborhood distance over the cross product of two masks.

        Zero when the masks intersect; used as the admissible per-pair
        bound in the revision search.  Either mask empty yields 0.
        """
        if rel1 & rel2 or not rel1 or not rel2:
            return 0
        key = (rel1, rel2)
        cached = self._min_dist_cache.get(key)
        if cached is not None:
            return cached
        dm = self.dist_matrix
        best = min(dm[i][j] for i in bits(rel1) for j in bits(rel2))
        self._min_dist_cache[key] = best
        return best


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def load_algebra(spec_text: str) -> AlgebraSpec:
    """Parse and validate an algebra-spec document.

    Raises DuplicateRelationName, MissingIdentity, NonInvolutiveInverse,
    IncompleteCompositionTable or DisconnectedNeighborGraph on invalid
    definitions, and AlgebraError on malformed lines.
    """
    name = None
    rel_names: list[str] = []
    index: dict[str, int] = {}
    identity_token = None
    inverse_decl: dict[str, str] = {}
    table_decl: dict[tuple[str, str], list[str]] = {}
    edges: list[tuple[str, str]] = []

    def require_known(tok: str, lineno: int) -> str:
        if tok not in index:
            raise AlgebraError(f"line {lineno}: unknown base relation {tok!r}")
        return tok

    for lineno, raw in enumerate(spec_text.splitlines(), start=1):
        parts = _strip_comment(raw).split()
        if not parts:
            continue
        keyword, args = parts[0], parts[1:]
        if keyword == "algebra":
            if len(args) != 1:
                raise AlgebraError(f"line {lineno}: expected 'algebra <name>'")
            name = args[0]
        elif keyword == "relations":
            for tok in args:
                if tok in index:
                    raise DuplicateRelationName(f"line {lineno}: duplicate base relation {tok!r}")
                index[tok] = len(rel_names)
                rel_names.append(tok)
        elif keyword == "identity":
            if len(args) != 1:
                raise AlgebraError(f"line {lineno}: expected 'identity <tok>'")
            identity_token = args[0]
        elif keyword == "inverse":
            if len(args) != 2:
                raise AlgebraError(f"line {lineno}: expected 'inverse <tok1> <tok2>'")
            a, b = (require_known(t, lineno) for t in args)
            for src, dst in ((a, b), (b, a)):
                if inverse_decl.get(src, dst) != dst:
                    raise NonInvolutiveInverse(
                        f"line {lineno}: {src!r} declared inverse of both "
                        f"{inverse_decl[src]!r} and {dst!r}"
                    )
                inverse_decl[src] = dst
        elif keyword == "table":
            if len(args) < 4 or args[2] != ":":
                raise AlgebraError(f"line {lineno}: expected 'table <first> <second> : <toks>'")
            first, second = (require_known(t, lineno) for t in args[:2])
            if (first, second) in table_decl:
                raise IncompleteCompositionTable(
                    f"line {lineno}: duplicate table entry for ({first}, {second})"
                )
            result = args[3:]
            if result != ["*"]:
                for tok in result:
                    require_known(tok, lineno)
            table_decl[(first, second)] = result
        elif keyword == "neighbor":
            if len(args) != 2:
                raise AlgebraError(f"line {lineno}: expected 'neighbor <tok1> <tok2>'")
            a, b = (require_known(t, lineno) for t in args)
            edges.append((a, b))
        else:
            raise AlgebraError(f"line {lineno}: unknown keyword {keyword!r}")

    if name is None:
        raise AlgebraError("missing 'algebra <name>' line")
    if len(rel_names) < 2:
        raise AlgebraError("an algebra needs at least 2 base relations")
    if identity_token is None or identity_token not in index:
        raise MissingIdentity(f"identity relation missing or undeclared in {name!r}")

    n = len(rel_names)
    inverse_index = []
    for tok in rel_names:
        if tok not in inverse_decl:
            raise NonInvolutiveInverse(f"no inverse declared for {tok!r}")
        inverse_index.append(index[inverse_decl[tok]])
    identity = index[identity_token]
    if inverse_index[identity] != identity:
        raise NonInvolutiveInverse(f"identity {identity_token!r} must be its own inverse")

    full = (1 << n) - 1
    table = []
    for i, first in enumerate(rel_names):
        row = []
        for j, second in enumerate(rel_names):
            entry = table_decl.get((first, second))
            if entry is None:
                raise IncompleteCompositionTable(
                    f"no table entry for ({first}, {second}) in {name!r}"
                )
            if entry == ["*"]:
                row.append(full)
            else:
                mask = 0
                for tok in entry:
                    mask |= 1 << index[tok]
                row.append(mask)
        table.append(tuple(row))

    adj: list[set[int]] = [set() for _ in range(n)]
    edge_index = []
    for a, b in edges:
        ia, ib = index[a], index[b]
        adj[ia].add(ib)
        adj[ib].add(ia)
        edge_index.append((ia, ib))

    dist_matrix = []
    for start in range(n):
        dist = [-1] * n
        dist[start] = 0
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        if min(dist) < 0:
            raise DisconnectedNeighborGraph(
                f"base relation {rel_names[dist.index(-1)]!r} unreachable from "
                f"{rel_names[start]!r} in the neighborhood graph of {name!r}"
            )
        dist_matrix.append(tuple(dist))

    return AlgebraSpec(
        name=name,
        base=tuple(BaseRelation(i, tok) for i, tok in enumerate(rel_names)),
        identity=identity,
        inverse_index=tuple(inverse_index),
        table=tuple(table),
        neighbor_edges=tuple(edge_index),
        dist_matrix=tuple(dist_matrix),
        source_text=spec_text,
    )


# ---------------------------------------------------------------------------
# Built-in algebra documents.
#
# The Allen composition table below is exact: it was enumerated from the
# endpoint-order semantics of the 13 relations (every configuration of the
# six endpoints of three intervals), not copied by hand.  The test suite
# re-derives it independently and cross-checks by random interval sampling.
# The RCC8 table is the standard one; the suite checks the inverse-mirror
# identity table(r,s) = inv(table(inv s, inv r)) and samples grid regions.
# ---------------------------------------------------------------------------

ALLEN_SPEC_TEXT = """\
algebra allen
relations b bi m mi o oi s si d di f fi eq
identity eq
inverse b bi
inverse m mi
inverse o oi
inverse s si
inverse d di
inverse f fi
inverse eq eq
table b b : b
table b bi : *
table b m : b
table b mi : b m o s d
table b o : b
table b oi : b m o s d
table b s : b
table b si : b
table b d : b m o s d
table b di : b
table b f : b m o s d
table b fi : b
table b eq : b
table bi b : *
table bi bi : bi
table bi m : bi mi oi d f
table bi mi : bi
table bi o : bi mi oi d f
table bi oi : bi
table bi s : bi mi oi d f
table bi si : bi
table bi d : bi mi oi d f
table bi di : bi
table bi f : bi
table bi fi : bi
table bi eq : bi
table m b : b
table m bi : bi mi oi si di
table m m : b
table m mi : f fi eq
table m o : b
table m oi : o s d
table m s : m
table m si : m
table m d : o s d
table m di : b
table m f : o s d
table m fi : b
table m eq : m
table mi b : b m o di fi
table mi bi : bi
table mi m : s si eq
table mi mi : bi
table mi o : oi d f
table mi oi : bi
table mi s : oi d f
table mi si : bi
table mi d : oi d f
table mi di : bi
table mi f : mi
table mi fi : mi
table mi eq : mi
table o b : b
table o bi : bi mi oi si di
table o m : b
table o mi : oi si di
table o o : b m o
table o oi : o oi s si d di f fi eq
table o s : o
table o si : o di fi
table o d : o s d
table o di : b m o di fi
table o f : o s d
table o fi : b m o
table o eq : o
table oi b : b m o di fi
table oi bi : bi
table oi m : o di fi
table oi mi : bi
table oi o : o oi s si d di f fi eq
table oi oi : bi mi oi
table oi s : oi d f
table oi si : bi mi oi
table oi d : oi d f
table oi di : bi mi oi si di
table oi f : oi
table oi fi : oi si di
table oi eq : oi
table s b : b
table s bi : bi
table s m : b
table s mi : mi
table s o : b m o
table s oi : oi d f
table s s : s
table s si : s si eq
table s d : d
table s di : b m o di fi
table s f : d
table s fi : b m o
table s eq : s
table si b : b m o di fi
table si bi : bi
table si m : o di fi
table si mi : mi
table si o : o di fi
table si oi : oi
table si s : s si eq
table si si : si
table si d : oi d f
table si di : di
table si f : oi
table si fi : di
table si eq : si
table d b : b
table d bi : bi
table d m : b
table d mi : bi
table d o : b m o s d
table d oi : bi mi oi d f
table d s : d
table d si : bi mi oi d f
table d d : d
table d di : *
table d f : d
table d fi : b m o s d
table d eq : d
table di b : b m o di fi
table di bi : bi mi oi si di
table di m : o di fi
table di mi : oi si di
table di o : o di fi
table di oi : oi si di
table di s : o di fi
table di si : di
table di d : o oi s si d di f fi eq
table di di : di
table di f : oi si di
table di fi : di
table di eq : di
table f b : b
table f bi : bi
table f m : m
table f mi : bi
table f o : o s d
table f oi : bi mi oi
table f s : d
table f si : bi mi oi
table f d : d
table f di : bi mi oi si di
table f f : f
table f fi : f fi eq
table f eq : f
table fi b : b
table fi bi : bi mi oi si di
table fi m : m
table fi mi : oi si di
table fi o : o
table fi oi : oi si di
table fi s : o
table fi si : di
table fi d : o s d
table fi di : di
table fi f : f fi eq
table fi fi : fi
table fi eq : fi
table eq b : b
table eq bi : bi
table eq m : m
table eq mi : mi
table eq o : o
table eq oi : oi
table eq s : s
table eq si : si
table eq d : d
table eq di : di
table eq f : f
table eq fi : fi
table eq eq : eq
neighbor b m
neighbor m o
neighbor o fi
neighbor o s
neighbor fi eq
neighbor s eq
neighbor fi di
neighbor s d
neighbor di si
neighbor eq si
neighbor d f
neighbor eq f
neighbor si oi
neighbor f oi
neighbor oi mi
neighbor mi bi
"""

RCC8_SPEC_TEXT = """\
algebra rcc8
relations dc ec po tpp ntpp tppi ntppi eq
identity eq
inverse dc dc
inverse ec ec
inverse po po
inverse tpp tppi
inverse ntpp ntppi
inverse eq eq
table dc dc : *
table dc ec : dc ec po tpp ntpp
table dc po : dc ec po tpp ntpp
table dc tpp : dc ec po tpp ntpp
table dc ntpp : dc ec po tpp ntpp
table dc tppi : dc
table dc ntppi : dc
table dc eq : dc
table ec dc : dc ec po tppi ntppi
table ec ec : dc ec po tpp tppi eq
table ec po : dc ec po tpp ntpp
table ec tpp : ec po tpp ntpp
table ec ntpp : po tpp ntpp
table ec tppi : dc ec
table ec ntppi : dc
table ec eq : ec
table po dc : dc ec po tppi ntppi
table po ec : dc ec po tppi ntppi
table po po : *
table po tpp : po tpp ntpp
table po ntpp : po tpp ntpp
table po tppi : dc ec po tppi ntppi
table po ntppi : dc ec po tppi ntppi
table po eq : po
table tpp dc : dc
table tpp ec : dc ec
table tpp po : dc ec po tpp ntpp
table tpp tpp : tpp ntpp
table tpp ntpp : ntpp
table tpp tppi : dc ec po tpp tppi eq
table tpp ntppi : dc ec po tppi ntppi
table tpp eq : tpp
table ntpp dc : dc
table ntpp ec : dc
table ntpp po : dc ec po tpp ntpp
table ntpp tpp : ntpp
table ntpp ntpp : ntpp
table ntpp tppi : dc ec po tpp ntpp
table ntpp ntppi : *
table ntpp eq : ntpp
table tppi dc : dc ec po tppi ntppi
table tppi ec : ec po tppi ntppi
table tppi po : po tppi ntppi
table tppi tpp : po tpp tppi eq
table tppi ntpp : po tpp ntpp
table tppi tppi : tppi ntppi
table tppi ntppi : ntppi
table tppi eq : tppi
table ntppi dc : dc ec po tppi ntppi
table ntppi ec : po tppi ntppi
table ntppi po : po tppi ntppi
table ntppi tpp : po tppi ntppi
table ntppi ntpp : po tpp ntpp tppi ntppi eq
table ntppi tppi : ntppi
table ntppi ntppi : ntppi
table ntppi eq : ntppi
table eq dc : dc
table eq ec : ec
table eq po : po
table eq tpp : tpp
table eq ntpp : ntpp
table eq tppi : tppi
table eq ntppi : ntppi
table eq eq : eq
neighbor dc ec
neighbor ec po
neighbor po tpp
neighbor po tppi
neighbor tpp ntpp
neighbor tppi ntppi
neighbor tpp eq
neighbor tppi eq
"""

BUILTIN_SPEC_TEXTS = {"allen": ALLEN_SPEC_TEXT, "rcc8": RCC8_SPEC_TEXT}


@lru_cache(maxsize=None)
def builtin(name: str) -> AlgebraSpec:
    """Load a built-in algebra by name ('allen' or 'rcc8')."""
    try:
        text = BUILTIN_SPEC_TEXTS[name]
    except KeyError:
        raise KeyError(f"no built-in algebra {name!r}; known: {sorted(BUILTIN_SPEC_TEXTS)}") from None
    return load_algebra(text)


def allen() -> AlgebraSpec:
    return builtin("allen")


def rcc8() -> AlgebraSpec:
    return builtin("rcc8")
