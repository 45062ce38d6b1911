"""Hybrid Bayesian-network structure: nodes, validation, topological order.

Three node kinds: discrete chance nodes (prior or CPT), deterministic nodes
(total map from parent states to one own state), and continuous equation
nodes (a sum of Choose terms over distribution branches). Equation nodes are
leaves. A validated Network is treated as immutable and may be shared across
threads; construction is single-owner.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

from .distributions import DistTerm, LognormalTerm, TriangularTerm
from .errors import ModelError

PROB_TOL = 1e-9  # probability vectors must sum to 1 within this


class NodeKind(str, Enum):
    CHANCE = "chance"
    DETERMINISTIC = "deterministic"
    EQUATION = "equation"


@dataclass
class ChooseTerm:
    """One ``Choose(selector, branch per selector state)`` summand."""

    selector: str
    branches: tuple[DistTerm, ...]


@dataclass
class EquationExpr:
    """Sum of Choose terms; the equation node's value is the branch sum."""

    terms: tuple[ChooseTerm, ...]


@dataclass
class Node:
    name: str
    kind: NodeKind
    parents: tuple[str, ...] = ()
    states: tuple[str, ...] = ()
    prior: tuple[float, ...] | None = None
    cpt: dict[tuple[str, ...], tuple[float, ...]] | None = None
    det_map: dict[tuple[str, ...], str] | None = None
    expr: EquationExpr | None = None


@dataclass
class Network:
    name: str
    nodes: list[Node] = field(default_factory=list)

    def node(self, name: str) -> Node:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(f"no node named {name!r}")

    def node_map(self) -> dict[str, Node]:
        return {n.name: n for n in self.nodes}

    def edges(self) -> list[tuple[str, str]]:
        """Parent -> child pairs derived from node declarations."""
        return [(p, n.name) for n in self.nodes for p in n.parents]

    def children(self, name: str) -> list[str]:
        return [n.name for n in self.nodes if name in n.parents]


@dataclass
class Violation:
    node: str | None
    reason: str

    def __str__(self) -> str:
        where = self.node if self.node is not None else "<network>"
        return f"{where}: {self.reason}"


def _prob_vector_problems(vec, n_states: int) -> list[str]:
    problems = []
    if len(vec) != n_states:
        problems.append(f"has {len(vec)} entries for {n_states} states")
    if any(p < 0.0 or p > 1.0 for p in vec):
        problems.append("has entries outside [0, 1]")
    if abs(math.fsum(vec) - 1.0) > PROB_TOL:
        problems.append(f"sums to {math.fsum(vec):.12g}, not 1")
    return problems


def _parent_state_combos(node: Node, by_name: dict[str, Node]):
    domains = [by_name[p].states for p in node.parents]
    return itertools.product(*domains)


def validate_network(net: Network) -> list[Violation]:
    """Collect every violated invariant; an empty report means valid.

    Validation never raises: unresolvable references, cycles, bad probability
    vectors and non-total maps are all reported together.
    """
    report: list[Violation] = []
    seen: set[str] = set()
    for n in net.nodes:
        if n.name in seen:
            report.append(Violation(n.name, "duplicate node name"))
        seen.add(n.name)
    by_name = net.node_map()

    for n in net.nodes:
        for p in n.parents:
            if p not in by_name:
                report.append(Violation(n.name, f"parent {p!r} does not exist"))

    cycle = _find_cycle(net, by_name)
    if cycle:
        report.append(Violation(None, "cycle: " + " -> ".join(cycle)))

    for n in net.nodes:
        report.extend(_validate_node(n, by_name))

    for n in net.nodes:
        if n.kind is NodeKind.EQUATION and net.children(n.name):
            report.append(Violation(n.name, "equation nodes must be leaves"))

    return report


def _validate_node(n: Node, by_name: dict[str, Node]) -> list[Violation]:
    out: list[Violation] = []
    parents_ok = all(p in by_name for p in n.parents)

    if n.kind in (NodeKind.CHANCE, NodeKind.DETERMINISTIC):
        if len(n.states) < 2:
            out.append(Violation(n.name, f"needs >= 2 states, has {len(n.states)}"))
        if len(set(n.states)) != len(n.states):
            out.append(Violation(n.name, "duplicate state names"))
        if n.expr is not None:
            out.append(Violation(n.name, "discrete node carries an equation"))

    if n.kind is NodeKind.CHANCE:
        if n.det_map is not None:
            out.append(Violation(n.name, "chance node carries a deterministic map"))
        if not n.parents:
            if n.prior is None:
                out.append(Violation(n.name, "root chance node needs a prior"))
            else:
                for problem in _prob_vector_problems(n.prior, len(n.states)):
                    out.append(Violation(n.name, f"prior {problem}"))
            if n.cpt is not None:
                out.append(Violation(n.name, "root chance node must not have a CPT"))
        else:
            if n.prior is not None:
                out.append(Violation(n.name, "non-root chance node must not have a prior"))
            if n.cpt is None:
                out.append(Violation(n.name, "non-root chance node needs a CPT"))
            elif parents_ok:
                combos = set(_parent_state_combos(n, by_name))
                for combo in combos:
                    row = n.cpt.get(tuple(combo))
                    if row is None:
                        out.append(
                            Violation(n.name, f"CPT row missing for parents {combo}")
                        )
                        continue
                    for problem in _prob_vector_problems(row, len(n.states)):
                        out.append(Violation(n.name, f"CPT row {combo} {problem}"))
                for combo in n.cpt:
                    if tuple(combo) not in combos:
                        out.append(
                            Violation(n.name, f"CPT row {combo} matches no parent states")
                        )

    elif n.kind is NodeKind.DETERMINISTIC:
        if n.prior is not None or n.cpt is not None:
            out.append(Violation(n.name, "deterministic node must not have prior or CPT"))
        if n.det_map is None:
            out.append(Violation(n.name, "deterministic node needs a map"))
        elif parents_ok:
            combos = set(_parent_state_combos(n, by_name))
            for combo in combos:
                target = n.det_map.get(tuple(combo))
                if target is None:
                    out.append(
                        Violation(n.name, f"map not total: no entry for parents {combo}")
                    )
                elif target not in n.states:
                    out.append(
                        Violation(n.name, f"map target {target!r} is not a state")
                    )
            for combo in n.det_map:
                if tuple(combo) not in combos:
                    out.append(
                        Violation(n.name, f"map entry {combo} matches no parent states")
                    )

    elif n.kind is NodeKind.EQUATION:
        if n.states:
            out.append(Violation(n.name, "equation node must not declare states"))
        if n.prior is not None or n.cpt is not None or n.det_map is not None:
            out.append(Violation(n.name, "equation node payload must be an expression"))
        if n.expr is None:
            out.append(Violation(n.name, "equation node needs an expression"))
        elif parents_ok:
            for i, term in enumerate(n.expr.terms):
                if term.selector not in n.parents:
                    out.append(
                        Violation(
                            n.name,
                            f"Choose selector {term.selector!r} is not a declared parent",
                        )
                    )
                    continue
                sel = by_name[term.selector]
                if sel.kind is NodeKind.EQUATION:
                    out.append(
                        Violation(n.name, f"Choose selector {term.selector!r} is not discrete")
                    )
                    continue
                if len(term.branches) != len(sel.states):
                    out.append(
                        Violation(
                            n.name,
                            f"arity: Choose on {term.selector!r} has {len(term.branches)} "
                            f"branches for {len(sel.states)} states",
                        )
                    )
                for b, branch in enumerate(term.branches):
                    if not isinstance(branch, (TriangularTerm, LognormalTerm)):
                        out.append(
                            Violation(n.name, f"term {i} branch {b} is not a distribution")
                        )

    return out


def _find_cycle(net: Network, by_name: dict[str, Node]) -> list[str] | None:
    """Return one directed cycle as a node-name path, or None."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n.name: WHITE for n in net.nodes}
    stack: list[str] = []

    def visit(name: str) -> list[str] | None:
        color[name] = GRAY
        stack.append(name)
        for child in net.children(name):
            if color.get(child) == GRAY:
                i = stack.index(child)
                return stack[i:] + [child]
            if color.get(child) == WHITE:
                found = visit(child)
                if found:
                    return found
        stack.pop()
        color[name] = BLACK
        return None

    for n in net.nodes:
        if color[n.name] == WHITE:
            found = visit(n.name)
            if found:
                return found
    return None


def topological_order(net: Network) -> list[str]:
    """Parents before children, ties broken by declaration order."""
    placed: set[str] = set()
    order: list[str] = []
    remaining = [n for n in net.nodes]
    while remaining:
        progressed = False
        for n in remaining:
            if all(p in placed for p in n.parents):
                order.append(n.name)
                placed.add(n.name)
                remaining.remove(n)
                progressed = True
                break
        if not progressed:
            raise ModelError(
                "cycle detected among: " + ", ".join(n.name for n in remaining)
            )
    return order


def resolve_deterministic(node: Node, parent_states: tuple[str, ...]) -> str:
    """Look up the single state a deterministic node takes for given parents."""
    if node.kind is not NodeKind.DETERMINISTIC:
        raise ModelError(f"{node.name} is not a deterministic node")
    assert node.det_map is not None
    try:
        return node.det_map[tuple(parent_states)]
    except KeyError:
        raise ModelError(
            f"{node.name}: map not total, no entry for parents {tuple(parent_states)}"
        ) from None


def structurally_equal(a: Network, b: Network, tol: float = 1e-9) -> bool:
    """Same nodes, wiring and payloads, with numbers compared within ``tol``."""
    if a.name != b.name or len(a.nodes) != len(b.nodes):
        return False
    for na, nb in zip(a.nodes, b.nodes):
        if (na.name, na.kind, na.parents, na.states) != (nb.name, nb.kind, nb.parents, nb.states):
            return False
        if not _vectors_close(na.prior, nb.prior, tol):
            return False
        if (na.cpt is None) != (nb.cpt is None):
            return False
        if na.cpt is not None:
            if set(na.cpt) != set(nb.cpt):
                return False
            if not all(_vectors_close(na.cpt[k], nb.cpt[k], tol) for k in na.cpt):
                return False
        if na.det_map != nb.det_map:
            return False
        if (na.expr is None) != (nb.expr is None):
            return False
        if na.expr is not None and not _exprs_close(na.expr, nb.expr, tol):
            return False
    return True


def _vectors_close(a, b, tol: float) -> bool:
    if a is None or b is None:
        return a is b
    return len(a) == len(b) and all(abs(x - y) <= tol for x, y in zip(a, b))


def _exprs_close(a: EquationExpr, b: EquationExpr, tol: float) -> bool:
    if len(a.terms) != len(b.terms):
        return False
    for ta, tb in zip(a.terms, b.terms):
        if ta.selector != tb.selector or len(ta.branches) != len(tb.branches):
            return False
        for ba, bb in zip(ta.branches, tb.branches):
            if type(ba) is not type(bb):
                return False
            if isinstance(ba, TriangularTerm):
                fields_a = (ba.minimum, ba.mode, ba.maximum, ba.scale)
                fields_b = (bb.minimum, bb.mode, bb.maximum, bb.scale)
            else:
                fields_a = (ba.mu, ba.sigma, ba.scale)
                fields_b = (bb.mu, bb.sigma, bb.scale)
            if any(abs(x - y) > tol for x, y in zip(fields_a, fields_b)):
                return False
    return True
