"""Pruned binary trees, their clopen algebras and the tree derivative.

Trees are length-indexed: level k holds binary strings of length k, every
node's length-(k-1) prefix is a node, and every node above the last level has
a child. The algebra at depth k is generated by the cylinders of the level-k
nodes, so its atoms are those nodes and its refinement map sends an atom to
its prefix.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from polishforge.components import ComponentTree, build_tree
from polishforge.config import DEFAULT_MERGE_CAP
from polishforge.errors import DimensionObstruction, TreeError
from polishforge.models import PresentationStream, cover_radius
from polishforge.presentation import require_compact

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrunedTree:
    """Prefix-closed set of binary strings up to a represented depth."""

    levels: tuple[frozenset[str], ...]

    def __post_init__(self) -> None:
        if not self.levels or self.levels[0] != frozenset({""}):
            raise TreeError("a tree starts with the empty string", 0)
        for k in range(1, len(self.levels)):
            for node in self.levels[k]:
                if len(node) != k or set(node) - {"0", "1"}:
                    raise TreeError(f"node {node!r} is not a binary string of length {k}", k)
                if node[:-1] not in self.levels[k - 1]:
                    raise TreeError(f"node {node!r} has no parent", k)
            for node in self.levels[k - 1]:
                if not self.children(node):
                    raise TreeError(f"node {node!r} is a dead end", k - 1)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def children(self, node: str) -> list[str]:
        k = len(node) + 1
        if k >= len(self.levels):
            return []
        return [c for c in (node + "0", node + "1") if c in self.levels[k]]

    def descendants_at(self, node: str, depth: int) -> list[str]:
        return sorted(c for c in self.levels[depth] if c.startswith(node))

    def isolated(self) -> frozenset[str]:
        """Nodes whose subtree is a single path down to the represented depth."""
        last = self.levels[-1]
        counts: Counter[str] = Counter()
        for leaf in last:
            for k in range(len(leaf) + 1):
                counts[leaf[:k]] += 1
        return frozenset(node for level in self.levels for node in level if counts[node] == 1)

    def truncated(self, depth: int) -> "PrunedTree":
        return PrunedTree(levels=self.levels[: depth + 1])

    def branching_per_level(self) -> tuple[int, ...]:
        """Number of nodes with two children, per level above the last."""
        return tuple(
            sum(1 for node in level if len(self.children(node)) == 2) for level in self.levels[:-1]
        )


def from_leaves(leaves: set[str] | frozenset[str]) -> PrunedTree:
    """Prefix closure of equal-length binary strings."""
    depth = max((len(leaf) for leaf in leaves), default=0)
    if any(len(leaf) != depth for leaf in leaves):
        raise TreeError("leaves must have equal length", depth)
    return PrunedTree(levels=tuple(frozenset(leaf[:k] for leaf in leaves) for k in range(depth + 1)))


def full_tree(depth: int) -> PrunedTree:
    """All binary strings up to depth."""
    leaves = {format(i, f"0{depth}b") for i in range(2**depth)} if depth else {""}
    return from_leaves(leaves)


def single_path(depth: int) -> PrunedTree:
    return from_leaves({"0" * depth})


def comb(depth: int) -> PrunedTree:
    """Spine 0^k with a branch 0^j 1 0 ... 0 leaving at every level j."""
    leaves = {"0" * depth}
    leaves.update("0" * j + "1" + "0" * (depth - j - 1) for j in range(depth))
    return from_leaves(leaves)


def comb_of_combs(depth: int) -> PrunedTree:
    """Spine 0^k with a comb hanging off at every level j."""
    leaves = {"0" * depth}
    for j in range(depth):
        rest = depth - j - 1
        leaves.update("0" * j + "1" + tail for tail in comb(rest).levels[rest])
    return from_leaves(leaves)


@dataclass(frozen=True)
class CBA:
    """Clopen algebra at one depth: atoms and the refinement map to depth - 1."""

    depth: int
    atoms: tuple[str, ...]
    refinement: dict[str, str] = field(default_factory=dict, compare=False, hash=False)

    @property
    def element_count(self) -> int:
        return 2 ** len(self.atoms)

    def multiplicities(self) -> tuple[int, ...]:
        """Sorted numbers of atoms refining each coarser atom."""
        return tuple(sorted(Counter(self.refinement.values()).values()))


def tree_to_algebra(t: PrunedTree, depth: int) -> CBA:
    """Atoms are the depth-level nodes; each refines its prefix."""
    if depth > t.depth:
        raise TreeError(f"tree is represented to depth {t.depth} only", depth)
    atoms = tuple(sorted(t.levels[depth]))
    refinement = {atom: atom[:-1] for atom in atoms} if depth else {}
    return CBA(depth=depth, atoms=atoms, refinement=refinement)


def algebra_sequence(t: PrunedTree, depth: int | None = None) -> list[CBA]:
    """Algebras at depths 0 .. depth."""
    last = t.depth if depth is None else depth
    return [tree_to_algebra(t, k) for k in range(last + 1)]


def algebra_to_tree(algebras: list[CBA]) -> PrunedTree:
    """Binary tree whose depth-k nodes biject with the depth-k atoms.

    The atoms refining one coarser atom become its children 0 and 1 in sorted
    order, so at most two atoms may refine an atom.
    """
    if not algebras or len(algebras[0].atoms) != 1:
        raise TreeError("the depth-0 algebra must have a single atom", 0)
    names = {algebras[0].atoms[0]: ""}
    levels = [frozenset({""})]
    for k, algebra in enumerate(algebras[1:], start=1):
        coarse = algebras[k - 1]
        if algebra.depth != k or set(algebra.refinement) != set(algebra.atoms):
            raise TreeError("refinement map does not cover the atoms", k)
        if set(algebra.refinement.values()) != set(coarse.atoms):
            raise TreeError("refinement map is not onto the coarser atoms", k)
        grouped: dict[str, list[str]] = {}
        for atom in sorted(algebra.atoms):
            grouped.setdefault(algebra.refinement[atom], []).append(atom)
        fresh = {}
        for parent, atoms in grouped.items():
            if len(atoms) > 2:
                raise TreeError(f"{len(atoms)} atoms refine {parent!r}; binary trees allow 2", k)
            for bit, atom in enumerate(atoms):
                fresh[atom] = names[parent] + str(bit)
        names = fresh
        levels.append(frozenset(fresh.values()))
    return PrunedTree(levels=tuple(levels))


def tree_derivative(t: PrunedTree, depth: int | None = None) -> PrunedTree:
    """Drop the isolated nodes, then re-prune; the result loses one level."""
    tree = t if depth is None else t.truncated(depth)
    if tree.depth == 0:
        raise TreeError("a depth-0 tree has no derivative", 0)
    isolated = tree.isolated()
    kept = [set(level - isolated) for level in tree.levels[:-1]]
    for k in range(len(kept) - 2, -1, -1):
        kept[k] = {node for node in kept[k] if node + "0" in kept[k + 1] or node + "1" in kept[k + 1]}
    if not kept[0]:
        logger.info("Derivative of a depth-%d tree is empty", tree.depth)
        return PrunedTree(levels=(frozenset({""}),))
    return PrunedTree(levels=tuple(frozenset(level) for level in kept))


def comma_code(i: int, m: int) -> str:
    """Prefix-free code of child i among m: 1^i 0, and 1^(m-1) for the last."""
    return "1" * i + ("0" if i < m - 1 else "")


def _check_disjoint(tree: ComponentTree, s: int, merge_cap: int) -> None:
    cloud = tree.stream.cloud
    bound = 2 * (merge_cap + 1) * cover_radius(s)
    for node in tree.levels[s]:
        rows = [tree.stream.row_of[pid] for pid in node.point_ids]
        diameter = max((cloud.max_distance(r, rows) for r in rows), default=Fraction(0))
        if diameter >= bound:
            raise DimensionObstruction(
                f"component {node.label} has diameter {float(diameter):.3g} "
                f"beyond {merge_cap + 1} merged balls",
                s,
            )


def zero_dim_to_tree(
    stream: PresentationStream,
    budget: int,
    *,
    merge_cap: int = DEFAULT_MERGE_CAP,
) -> PrunedTree:
    """Pruned tree of the component tree of a zero-dimensional compact stream.

    Each stage's components must shrink with the cover: a component wider than
    merge_cap + 1 cover balls means the covers do not split into disjoint
    clopen pieces. Children are named by comma codes and the final strings are
    padded with zeros to a common length.
    """
    require_compact(stream)
    last = min(budget, stream.num_stages) - 1
    tree = build_tree(stream, last)
    codes: dict[tuple[int, int], str] = {}
    roots = tree.levels[0]
    for node in roots:
        codes[node.key] = comma_code(node.index, len(roots))
    for s in range(1, last + 1):
        _check_disjoint(tree, s, merge_cap)
        for parent in tree.levels[s - 1]:
            children = tree.children(parent)
            for i, child in enumerate(children):
                codes[child.key] = codes[parent.key] + comma_code(i, len(children))
    leaves = [codes[node.key] for node in tree.levels[last]]
    length = max(len(leaf) for leaf in leaves)
    result = from_leaves({leaf + "0" * (length - len(leaf)) for leaf in leaves})
    logger.info("Extracted a depth-%d tree with %d leaves", result.depth, len(result.levels[-1]))
    return result
