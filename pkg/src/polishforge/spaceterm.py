"""Symbolic algebra of compact spaces.

Terms are immutable dataclasses. Sum is a separated union, OmegaSum countably
many copies, AlphaOmega the one-point compactification of countably many
copies (pointed at infinity), Ordinal(k) the ordinal space omega^k + 1 and
Wedge glues pointed parts at their basepoints. SSigma and SPi name the
alternating towers built from the point and the circle.

The s-expression syntax is the one format_term prints, e.g.
``(alpha (sum (sphere 1) (ordinal 1)))`` or
``(wedge (top (sphere 2)) (top (ordinal 1)))``.
"""

import logging
import re
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal, Union

from polishforge.errors import TermSyntaxError, UnsupportedTermError

logger = logging.getLogger(__name__)

# Largest ordinal exponent k of omega^k + 1
MAX_ORDINAL = 4

Base = Literal["top", "isolated"]
BASES: tuple[Base, ...] = ("top", "isolated")


class _Term:
    def __str__(self) -> str:
        return format_term(self)  # type: ignore[arg-type]


@dataclass(frozen=True)
class One(_Term):
    """The one-point space."""


@dataclass(frozen=True)
class Empty(_Term):
    """The empty space; only produced transiently by derivatives."""


@dataclass(frozen=True)
class Sphere(_Term):
    """The n-sphere."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise UnsupportedTermError(f"sphere dimension must be nonnegative, got {self.n}")


@dataclass(frozen=True)
class Ordinal(_Term):
    """The ordinal space omega^k + 1."""

    k: int

    def __post_init__(self) -> None:
        if not 0 <= self.k <= MAX_ORDINAL:
            raise UnsupportedTermError(f"ordinal exponent must be in [0, {MAX_ORDINAL}], got {self.k}")


@dataclass(frozen=True)
class Sum(_Term):
    """Separated union; the basepoint is the first part's."""

    parts: tuple["SpaceTerm", ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise UnsupportedTermError("sum needs at least one part")


@dataclass(frozen=True)
class OmegaSum(_Term):
    """Countably many separated copies."""

    term: "SpaceTerm"


@dataclass(frozen=True)
class AlphaOmega(_Term):
    """One-point compactification of countably many copies."""

    term: "SpaceTerm"


@dataclass(frozen=True)
class Pointed:
    """A wedge part with its basepoint: the top point or an isolated point."""

    term: "SpaceTerm"
    base: Base = "top"

    def __post_init__(self) -> None:
        if self.base not in BASES:
            raise UnsupportedTermError(f"unknown basepoint {self.base!r}")


@dataclass(frozen=True)
class Wedge(_Term):
    """Pointed parts glued at their basepoints."""

    parts: tuple[Pointed, ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise UnsupportedTermError("wedge needs at least one part")


@dataclass(frozen=True)
class SSigma(_Term):
    """The tower space with an odd index; plus adds the lower SPi summand."""

    index: int
    plus: bool = False

    def __post_init__(self) -> None:
        _check_index(self.index)


@dataclass(frozen=True)
class SPi(_Term):
    """The tower space with an odd index, starting from the circle."""

    index: int

    def __post_init__(self) -> None:
        _check_index(self.index)


SpaceTerm = Union[One, Empty, Sphere, Ordinal, Sum, OmegaSum, AlphaOmega, Wedge, SSigma, SPi]


def _check_index(index: int) -> None:
    if index < 1 or index % 2 == 0:
        raise UnsupportedTermError(f"tower index must be odd and positive, got {index}")


# --- syntax ---


def format_term(t: SpaceTerm) -> str:
    """Canonical s-expression of a term."""
    match t:
        case One():
            return "(one)"
        case Empty():
            return "(empty)"
        case Sphere(n):
            return f"(sphere {n})"
        case Ordinal(k):
            return f"(ordinal {k})"
        case Sum(parts):
            return "(sum " + " ".join(format_term(p) for p in parts) + ")"
        case OmegaSum(term):
            return f"(omega {format_term(term)})"
        case AlphaOmega(term):
            return f"(alpha {format_term(term)})"
        case Wedge(parts):
            return "(wedge " + " ".join(_format_pointed(p) for p in parts) + ")"
        case SSigma(index, plus):
            return f"(ssigma{'+' if plus else ''} {index})"
        case SPi(index):
            return f"(spi {index})"
    raise UnsupportedTermError(f"not a space term: {t!r}")


def _format_pointed(p: Pointed) -> str:
    return f"({p.base} {format_term(p.term)})"


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = [(m.group(), m.start()) for m in _TOKEN.finditer(text)]
        self.end = len(text)
        self.pos = 0

    def _position(self) -> int:
        return self.tokens[self.pos][1] if self.pos < len(self.tokens) else self.end

    def peek(self, offset: int = 0) -> str | None:
        index = self.pos + offset
        return self.tokens[index][0] if index < len(self.tokens) else None

    def take(self) -> str:
        if self.pos >= len(self.tokens):
            raise TermSyntaxError("unexpected end of input", self.end)
        token = self.tokens[self.pos][0]
        self.pos += 1
        return token

    def expect(self, value: str) -> None:
        position = self._position()
        token = self.take()
        if token != value:
            raise TermSyntaxError(f"expected {value!r}, got {token!r}", position)

    def integer(self) -> int:
        position = self._position()
        token = self.take()
        if not token.isdigit():
            raise TermSyntaxError(f"expected a natural number, got {token!r}", position)
        return int(token)

    def term(self) -> SpaceTerm:
        start = self._position()
        self.expect("(")
        head_position = self._position()
        head = self.take()
        try:
            term = self._body(head, head_position)
        except UnsupportedTermError as exc:
            raise TermSyntaxError(str(exc), start) from exc
        self.expect(")")
        return term

    def _body(self, head: str, position: int) -> SpaceTerm:
        match head:
            case "one":
                return One()
            case "empty":
                return Empty()
            case "sphere":
                return Sphere(self.integer())
            case "ordinal":
                return Ordinal(self.integer())
            case "ssigma":
                return SSigma(self.integer())
            case "ssigma+":
                return SSigma(self.integer(), plus=True)
            case "spi":
                return SPi(self.integer())
            case "omega":
                return OmegaSum(self.term())
            case "alpha":
                return AlphaOmega(self.term())
            case "sum":
                parts = [self.term()]
                while self.peek() == "(":
                    parts.append(self.term())
                return Sum(tuple(parts))
            case "wedge":
                pointed = [self.pointed()]
                while self.peek() == "(":
                    pointed.append(self.pointed())
                return Wedge(tuple(pointed))
        raise TermSyntaxError(f"unknown term head {head!r}", position)

    def pointed(self) -> Pointed:
        if self.peek() == "(" and self.peek(1) in BASES:
            self.expect("(")
            base: Base = "top" if self.take() == "top" else "isolated"
            term = self.term()
            self.expect(")")
            return Pointed(term, base)
        return Pointed(self.term())


def parse_term(text: str) -> SpaceTerm:
    """Parse an s-expression term; raises TermSyntaxError with the offending position."""
    parser = _Parser(text)
    term = parser.term()
    if parser.pos < len(parser.tokens):
        raise TermSyntaxError("trailing input after term", parser.tokens[parser.pos][1])
    return term


# --- towers and normal form ---


def expand_tower(t: SSigma | SPi) -> SpaceTerm:
    """One unfolding step of a tower term."""
    if isinstance(t, SSigma):
        if t.index == 1:
            return One()
        compactified = AlphaOmega(SSigma(t.index - 2, plus=True))
        if t.plus:
            return Sum((compactified, SPi(t.index - 2)))
        return compactified
    if t.index == 1:
        return Sphere(1)
    return AlphaOmega(Sum((SPi(t.index - 2), SSigma(t.index - 2, plus=True))))


def unfold(t: SpaceTerm) -> SpaceTerm:
    """Expand towers and ordinals into point, sphere, sum and compactification terms."""
    match t:
        case SSigma() | SPi():
            return unfold(expand_tower(t))
        case Ordinal(k):
            if k == 0:
                return Sum((One(), One()))
            term: SpaceTerm = One()
            for _ in range(k):
                term = AlphaOmega(term)
            return term
        case Sum(parts):
            return Sum(tuple(unfold(p) for p in parts))
        case OmegaSum(term):
            return OmegaSum(unfold(term))
        case AlphaOmega(term):
            return AlphaOmega(unfold(term))
        case Wedge(parts):
            return Wedge(tuple(Pointed(unfold(p.term), p.base) for p in parts))
    return t


def _canonical_sum(parts: Sequence[SpaceTerm], *, dedupe: bool = False) -> SpaceTerm:
    flat: list[SpaceTerm] = []
    for part in parts:
        if isinstance(part, Sum):
            flat.extend(part.parts)
        elif not isinstance(part, Empty):
            flat.append(part)
    copied = {p.term for p in flat if isinstance(p, OmegaSum)}
    absorbed: set[SpaceTerm] = set()
    for p in flat:
        if isinstance(p, AlphaOmega):
            absorbed.add(p.term)
            if isinstance(p.term, Sum):
                absorbed.update(p.term.parts)
    kept: list[SpaceTerm] = []
    for p in flat:
        if p in absorbed or (not isinstance(p, OmegaSum) and p in copied):
            continue
        if (dedupe or isinstance(p, OmegaSum)) and p in kept:
            continue
        kept.append(p)
    if not kept:
        return Empty()
    if len(kept) == 1:
        return kept[0]
    return Sum(tuple(sorted(kept, key=format_term)))


def _lift_top(term: SpaceTerm, detached: list[SpaceTerm]) -> SpaceTerm:
    """Strip summands that do not carry the top point, collecting them."""
    while True:
        if isinstance(term, Sum):
            parts = [p for p in term.parts if not isinstance(p, Empty)]
            if not parts:
                return Empty()
            detached.extend(parts[1:])
            term = parts[0]
        elif isinstance(term, OmegaSum):
            detached.append(term)
            term = term.term
        else:
            return term


def _canonical_wedge(parts: Sequence[Pointed]) -> SpaceTerm:
    members: list[Pointed] = []
    detached: list[SpaceTerm] = []
    queue = list(parts)
    while queue:
        part = queue.pop(0)
        term = part.term
        if part.base == "top":
            term = _lift_top(term, detached)
            if isinstance(term, Wedge):
                queue.extend(term.parts)
                continue
        term = _canonical(term)
        if isinstance(term, One | Empty):
            continue
        if part.base == "top" and isinstance(term, Sum | Wedge | OmegaSum):
            queue.append(Pointed(term, "top"))
            continue
        members.append(Pointed(term, part.base))
    core: SpaceTerm
    if not members:
        core = One()
    elif len(members) == 1:
        core = members[0].term
    else:
        core = Wedge(tuple(sorted(members, key=_format_pointed)))
    if detached:
        return _canonical_sum([core, *(_canonical(d) for d in detached)])
    return core


def _canonical(t: SpaceTerm) -> SpaceTerm:
    match t:
        case Sum(parts):
            return _canonical_sum([_canonical(p) for p in parts])
        case OmegaSum(term):
            inner = _canonical(term)
            if isinstance(inner, Empty | OmegaSum):
                return inner
            return OmegaSum(inner)
        case AlphaOmega(term):
            inner = _canonical(term)
            if isinstance(inner, Empty):
                return One()
            if isinstance(inner, OmegaSum):
                inner = inner.term
            if isinstance(inner, Sum):
                plain = [p.term if isinstance(p, OmegaSum) else p for p in inner.parts]
                inner = _canonical_sum(plain, dedupe=True)
            return AlphaOmega(inner)
        case Wedge(parts):
            return _canonical_wedge(parts)
    return t


def normalize(t: SpaceTerm) -> SpaceTerm:
    """Canonical form: towers and ordinals unfolded, sums flattened and sorted.

    Absorption: copies of X next to OmegaSum(X) and summands of a
    compactified block next to it disappear; wedges lift the summands that do
    not carry the glued point out of the wedge and drop point parts.
    """
    current = unfold(t)
    while True:
        following = _canonical(current)
        if following == current:
            return current
        current = following


def is_empty(t: SpaceTerm) -> bool:
    """True iff the term denotes the empty space."""
    match t:
        case Empty():
            return True
        case Sum(parts):
            return all(is_empty(p) for p in parts)
        case OmegaSum(term):
            return is_empty(term)
    return False


# --- Cantor-Bendixson derivative ---


def top_survives(t: SpaceTerm) -> bool:
    """True iff the top point of t is not isolated."""
    match t:
        case AlphaOmega():
            return True
        case Sphere(n):
            return n >= 1
        case Ordinal(k):
            return k >= 1
        case Sum(parts):
            return top_survives(parts[0])
        case OmegaSum(term):
            return top_survives(term)
        case Wedge(parts):
            return any(base_survives(p) for p in parts)
        case SSigma() | SPi():
            return top_survives(expand_tower(t))
    return False


def base_survives(p: Pointed) -> bool:
    """True iff the basepoint stays in the derivative."""
    return p.base == "top" and top_survives(p.term)


def cb_derivative(t: SpaceTerm) -> SpaceTerm:
    """The subspace of non-isolated points, structurally."""
    match t:
        case One() | Empty():
            return Empty()
        case Sphere(n):
            return Empty() if n == 0 else t
        case Ordinal(k):
            if k == 0:
                return Empty()
            return One() if k == 1 else Ordinal(k - 1)
        case SSigma() | SPi():
            return cb_derivative(expand_tower(t))
        case Sum(parts):
            return Sum(tuple(cb_derivative(p) for p in parts))
        case OmegaSum(term):
            return OmegaSum(cb_derivative(term))
        case AlphaOmega(term):
            inner = cb_derivative(term)
            return One() if is_empty(inner) else AlphaOmega(inner)
        case Wedge(parts):
            return _wedge_derivative(parts)
    raise UnsupportedTermError(f"not a space term: {t!r}")


def _wedge_derivative(parts: Sequence[Pointed]) -> SpaceTerm:
    survivors = [Pointed(cb_derivative(p.term)) for p in parts if base_survives(p)]
    detached = [cb_derivative(p.term) for p in parts if not base_survives(p)]
    if not survivors:
        return Sum(tuple(detached))
    core = Wedge(tuple(survivors)) if len(survivors) > 1 else survivors[0].term
    return Sum((core, *detached)) if detached else core


# --- circle rank ---

ComponentKind = Literal["point", "circle", "other"]


@dataclass(frozen=True)
class ComponentInfo:
    """Shape and circle rank of one component."""

    kind: ComponentKind
    rank: int

    @property
    def contribution(self) -> int:
        """Rank this component forces on a component it accumulates at."""
        from_circle = 1 if self.kind == "circle" else 0
        from_rank = self.rank + 1 if self.rank >= 1 else 0
        return max(from_circle, from_rank)


@dataclass(frozen=True)
class Summary:
    """The basepoint component and the other components, in aggregate."""

    base: ComponentInfo
    rest_rank: int = 0
    rest_contribution: int = 0

    @property
    def rank(self) -> int:
        return max(self.base.rank, self.rest_rank)

    @property
    def contribution(self) -> int:
        return max(self.base.contribution, self.rest_contribution)


_POINT = ComponentInfo("point", 0)


def _merge_base(infos: Sequence[ComponentInfo]) -> ComponentInfo:
    circles = sum(1 for info in infos if info.kind == "circle")
    points = sum(1 for info in infos if info.kind == "point")
    kind: ComponentKind
    if points == len(infos):
        kind = "point"
    elif circles == 1 and circles + points == len(infos):
        kind = "circle"
    else:
        kind = "other"
    return ComponentInfo(kind, max(info.rank for info in infos))


def summarize(t: SpaceTerm) -> Summary | None:
    """Component summary of t, or None for the empty space."""
    match t:
        case Empty():
            return None
        case One():
            return Summary(_POINT)
        case Sphere(n):
            if n == 0:
                return Summary(_POINT)
            return Summary(ComponentInfo("circle" if n == 1 else "other", 0))
        case Ordinal() | SSigma() | SPi():
            return summarize(unfold(t))
        case Sum(parts):
            summaries = [s for s in (summarize(p) for p in parts) if s is not None]
            if not summaries:
                return None
            head, tail = summaries[0], summaries[1:]
            return Summary(
                head.base,
                max([head.rest_rank, *(s.rank for s in tail)]),
                max([head.rest_contribution, *(s.contribution for s in tail)]),
            )
        case OmegaSum(term):
            inner = summarize(term)
            if inner is None:
                return None
            return Summary(inner.base, inner.rank, inner.contribution)
        case AlphaOmega(term):
            inner = summarize(term)
            if inner is None:
                return Summary(_POINT)
            return Summary(ComponentInfo("point", inner.contribution), inner.rank, inner.contribution)
        case Wedge(parts):
            pointed = [s for s in (_pointed_summary(p) for p in parts) if s is not None]
            if not pointed:
                return None
            return Summary(
                _merge_base([s.base for s in pointed]),
                max(s.rest_rank for s in pointed),
                max(s.rest_contribution for s in pointed),
            )
    raise UnsupportedTermError(f"not a space term: {t!r}")


def _pointed_summary(p: Pointed) -> Summary | None:
    inner = summarize(p.term)
    if inner is None or p.base == "top":
        return inner
    return Summary(_POINT, inner.rank, inner.contribution)


def s1_rank(t: SpaceTerm) -> int:
    """Circle rank: the largest circle rank over the components of t."""
    summary = summarize(t)
    return 0 if summary is None else summary.rank


# --- catalogue ---


def sigma_tower(n: int, *, plus: bool = False) -> SpaceTerm:
    """Unfolded tower space of index 2n + 1."""
    return unfold(SSigma(2 * n + 1, plus=plus))


def pi_tower(n: int) -> SpaceTerm:
    """Unfolded circle tower of index 2n + 1."""
    return unfold(SPi(2 * n + 1))


def z_term(table: Sequence[bool], k: int) -> SpaceTerm:
    """Compactified block of S^(n+1) wedge omega^(k-1)+1 (n in D) or omega^k+1, plus omega^k+1."""
    if not 1 <= k <= MAX_ORDINAL:
        raise UnsupportedTermError(f"k must be in [1, {MAX_ORDINAL}], got {k}")
    parts: list[SpaceTerm] = [
        Wedge((Pointed(Sphere(n + 1)), Pointed(Ordinal(k - 1 if member else k))))
        for n, member in enumerate(table)
    ]
    parts.append(Ordinal(k))
    return AlphaOmega(Sum(tuple(parts)))


def zd_term(table: Sequence[bool]) -> SpaceTerm:
    """Compactified block of S^(2n+1) for n in D and S^(2n+2) otherwise."""
    if not table:
        return One()
    return AlphaOmega(Sum(tuple(Sphere(2 * n + 1 if m else 2 * n + 2) for n, m in enumerate(table))))


def xd_term(table: Sequence[bool]) -> SpaceTerm:
    """Compactified isolated points and copies of S^(n+1) for n in D."""
    parts: list[SpaceTerm] = [One()]
    parts.extend(Sphere(n + 1) for n, member in enumerate(table) if member)
    return AlphaOmega(Sum(tuple(parts)))


def pd1_term(table: Sequence[bool]) -> SpaceTerm:
    """Compactified block of S^(n+1) wedged with SSigma3 (n in D) or SPi3, plus circles."""
    parts: list[SpaceTerm] = [
        Wedge((Pointed(Sphere(n + 1)), Pointed(SSigma(3) if member else SPi(3))))
        for n, member in enumerate(table)
    ]
    parts.append(SPi(1))
    return AlphaOmega(Sum(tuple(parts)))
