import numpy as np
import pytest

import promobn as pb
from promobn.distributions import LognormalTerm, TriangularTerm
from promobn.network import ChooseTerm, EquationExpr, Network, Node, NodeKind


@pytest.fixture(scope="session")
def fig2_text() -> str:
    return pb.builtin_model_path().read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fig2(fig2_text) -> Network:
    return pb.parse_network(fig2_text)


def _tidy_probs(rng: np.random.Generator, k: int) -> tuple[float, ...]:
    """Probability vector with 4-decimal entries summing to 1."""
    raw = rng.integers(1, 50, size=k)
    raw = np.round(raw * 10_000 / raw.sum()).astype(int)
    raw[-1] = 10_000 - raw[:-1].sum()
    return tuple(float(v) / 10_000 for v in raw)


def _tidy(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(np.round(rng.uniform(lo, hi), 3))


def _random_branch(rng: np.random.Generator):
    scale = 1.0 if rng.random() < 0.5 else _tidy(rng, 0.1, 2.0)
    if rng.random() < 0.5:
        a = _tidy(rng, 0.5, 20.0)
        b = a + _tidy(rng, 1.0, 30.0)
        c = float(np.round(rng.uniform(a, b), 3))
        return TriangularTerm(a, c, b, scale=scale)
    return LognormalTerm(_tidy(rng, 0.5, 6.0), _tidy(rng, 0.05, 1.0), scale=scale)


def random_network(seed: int) -> Network:
    """Small valid network with tidy numbers: chance roots, optionally a
    CPT child, deterministic nodes, and an equation leaf."""
    rng = np.random.default_rng(seed)
    nodes: list[Node] = []
    discrete: list[Node] = []

    for i in range(int(rng.integers(1, 3))):
        k = int(rng.integers(2, 5))
        node = Node(
            name=f"Root{i}",
            kind=NodeKind.CHANCE,
            states=tuple(f"R{i}S{j}" for j in range(k)),
            prior=_tidy_probs(rng, k),
        )
        nodes.append(node)
        discrete.append(node)

    if rng.random() < 0.6:
        n_par = int(rng.integers(1, min(2, len(discrete)) + 1))
        parents = list(rng.choice(len(discrete), size=n_par, replace=False))
        parent_nodes = [discrete[i] for i in parents]
        k = int(rng.integers(2, 4))
        import itertools

        cpt = {
            combo: _tidy_probs(rng, k)
            for combo in itertools.product(*[p.states for p in parent_nodes])
        }
        node = Node(
            name="Mid",
            kind=NodeKind.CHANCE,
            parents=tuple(p.name for p in parent_nodes),
            states=tuple(f"MS{j}" for j in range(k)),
            cpt=cpt,
        )
        nodes.append(node)
        discrete.append(node)

    for d in range(int(rng.integers(0, 3))):
        parent = discrete[int(rng.integers(0, len(discrete)))]
        k = int(rng.integers(2, 4))
        states = tuple(f"D{d}S{j}" for j in range(k))
        det_map = {
            (ps,): states[int(rng.integers(0, k))] for ps in parent.states
        }
        # keep the map surjective enough to matter, but any total map is valid
        node = Node(
            name=f"Det{d}",
            kind=NodeKind.DETERMINISTIC,
            parents=(parent.name,),
            states=states,
            det_map=det_map,
        )
        nodes.append(node)
        discrete.append(node)

    if rng.random() < 0.8:
        n_terms = int(rng.integers(1, min(3, len(discrete)) + 1))
        sel_idx = rng.choice(len(discrete), size=n_terms, replace=False)
        selectors = [discrete[i] for i in sel_idx]
        terms = tuple(
            ChooseTerm(
                selector=s.name,
                branches=tuple(_random_branch(rng) for _ in s.states),
            )
            for s in selectors
        )
        nodes.append(
            Node(
                name="Out",
                kind=NodeKind.EQUATION,
                parents=tuple(s.name for s in selectors),
                expr=EquationExpr(terms=terms),
            )
        )

    return Network(name=f"random-{seed}", nodes=nodes)
