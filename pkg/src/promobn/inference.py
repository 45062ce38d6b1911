"""Forward Monte Carlo sampling, exact discrete posteriors, and
continuous-evidence inference for single-driver promotional models.

Random streams: every sampling site (a chance node, or one branch of one
Choose term) draws from its own counter-based generator keyed on
(master seed, site), with iteration i's uniforms at fixed positions
i*k..(i+1)*k. Results are therefore bit-identical for a given
(net, n, seed, evidence) no matter how iterations are partitioned
across workers.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .distributions import DistTerm
from .errors import (
    EvidenceError,
    InconsistentEvidenceError,
    ModelError,
    UndefinedPosteriorError,
    UnsupportedShapeError,
)
from .network import (
    ChooseTerm,
    EquationExpr,
    Network,
    Node,
    NodeKind,
    resolve_deterministic,
    topological_order,
)

DEFAULT_BANDWIDTH = 5.0
DEFAULT_GRID_STEP = 0.25
DEFAULT_BASE_WEIGHTS = (0.25, 0.375, 0.375)

METHOD_EXACT = "exact-enumeration"
METHOD_CONVOLUTION = "convolution-density"
METHOD_KDE = "monte-carlo-kde"


@dataclass
class ContinuousEvidence:
    node: str
    value: float
    bandwidth: float = DEFAULT_BANDWIDTH


@dataclass
class Evidence:
    discrete: dict[str, str] = field(default_factory=dict)
    continuous: ContinuousEvidence | None = None


@dataclass
class SampleSet:
    n: int
    seed: int
    values: np.ndarray | None  # the equation node's draws, when one exists
    state_trace: dict[str, np.ndarray]  # node -> per-iteration state index
    state_names: dict[str, tuple[str, ...]]


@dataclass
class PosteriorReport:
    method: str
    probabilities: dict[str, dict[str, float]]  # node -> state -> probability

    def vector(self, node: str) -> list[float]:
        return list(self.probabilities[node].values())


# random streams -----------------------------------------------------------


def _site_key(seed: int, site: str) -> list[int]:
    digest = hashlib.sha256(f"{seed}|{site}".encode()).digest()
    return [int.from_bytes(digest[i : i + 8], "little") for i in (0, 8)]


def _site_uniforms(seed: int, site: str, n: int, per_draw: int) -> np.ndarray:
    """``per_draw`` uniforms per iteration, shape (per_draw, n); iteration i
    occupies stream positions i*per_draw..(i+1)*per_draw."""
    rng = np.random.Generator(np.random.Philox(key=_site_key(seed, site)))
    return rng.random((n, per_draw)).T


# forward sampling ----------------------------------------------------------


def _check_discrete_evidence(net: Network, evidence: dict[str, str]) -> None:
    by_name = net.node_map()
    for name, state in evidence.items():
        node = by_name.get(name)
        if node is None:
            raise EvidenceError(f"evidence names unknown node {name!r}")
        if node.kind is NodeKind.EQUATION:
            raise EvidenceError(
                f"{name} is an equation node; observe it with a value, not a state"
            )
        if state not in node.states:
            raise EvidenceError(f"node {name!r} has no state {state!r}")


def forward_sample(
    net: Network, n: int, seed: int, evidence: dict[str, str] | None = None
) -> SampleSet:
    """Draw n joint samples: roots from priors (clamped nodes fixed),
    deterministic nodes resolved, equation nodes summed over the realized
    Choose branches."""
    if n < 1:
        raise ValueError(f"need n >= 1 iterations, got {n}")
    clamps = dict(evidence or {})
    _check_discrete_evidence(net, clamps)
    for name, state in clamps.items():
        if net.node(name).kind is not NodeKind.CHANCE:
            raise EvidenceError(
                f"forward sampling clamps chance nodes only; {name!r} is not one"
            )

    by_name = net.node_map()
    trace: dict[str, np.ndarray] = {}
    names: dict[str, tuple[str, ...]] = {}
    equation_values: dict[str, np.ndarray] = {}

    for name in topological_order(net):
        node = by_name[name]
        if node.kind is NodeKind.CHANCE:
            names[name] = node.states
            if name in clamps:
                idx = node.states.index(clamps[name])
                trace[name] = np.full(n, idx, dtype=np.int64)
            else:
                u = _site_uniforms(seed, f"chance:{name}", n, 1)[0]
                if not node.parents:
                    cum = np.cumsum(node.prior)
                    trace[name] = np.minimum(
                        np.searchsorted(cum, u, side="right"), len(node.states) - 1
                    )
                else:
                    trace[name] = _sample_cpt_rows(node, by_name, trace, u)
        elif node.kind is NodeKind.DETERMINISTIC:
            names[name] = node.states
            trace[name] = _resolve_deterministic_vector(node, by_name, trace, n)
        else:
            values = np.zeros(n)
            assert node.expr is not None
            for t, term in enumerate(node.expr.terms):
                sel = trace[term.selector]
                for b, branch in enumerate(term.branches):
                    mask = sel == b
                    if not mask.any():
                        continue
                    u = _site_uniforms(
                        seed,
                        f"equation:{name}:term{t}:branch{b}",
                        n,
                        branch.uniforms_per_draw,
                    )
                    values[mask] += branch.from_uniforms(u[:, mask])
            equation_values[name] = values

    only = next(iter(equation_values.values())) if len(equation_values) == 1 else None
    return SampleSet(n=n, seed=seed, values=only, state_trace=trace, state_names=names)


def _flat_parent_index(node: Node, by_name, trace) -> tuple[np.ndarray, list]:
    domains = [by_name[p].states for p in node.parents]
    flat = None
    for p, dom in zip(node.parents, domains):
        col = trace[p]
        flat = col.copy() if flat is None else flat * len(dom) + col
    if flat is None:
        flat = np.zeros(0, dtype=np.int64)
    return flat, list(itertools.product(*domains))


def _sample_cpt_rows(node: Node, by_name, trace, u: np.ndarray) -> np.ndarray:
    flat, combos = _flat_parent_index(node, by_name, trace)
    cum_rows = np.empty((len(combos), len(node.states)))
    for i, combo in enumerate(combos):
        cum_rows[i] = np.cumsum(node.cpt[combo])
    cum = cum_rows[flat]
    idx = (u[:, None] >= cum).sum(axis=1)
    return np.minimum(idx, len(node.states) - 1)


def _resolve_deterministic_vector(node: Node, by_name, trace, n: int) -> np.ndarray:
    flat, combos = _flat_parent_index(node, by_name, trace)
    lookup = np.empty(len(combos), dtype=np.int64)
    for i, combo in enumerate(combos):
        lookup[i] = node.states.index(resolve_deterministic(node, combo))
    if not node.parents:
        return np.full(n, lookup[0], dtype=np.int64)
    return lookup[flat]


def equation_mean_ci(samples: SampleSet) -> tuple[float, tuple[float, float]]:
    """Sample mean with a normal-approximation 95% interval."""
    if samples.values is None:
        raise ModelError("sample set has no equation-node values")
    if samples.n < 2:
        raise ValueError("need at least 2 samples for a confidence interval")
    mean = float(samples.values.mean())
    half = 1.96 * float(samples.values.std(ddof=1)) / math.sqrt(samples.n)
    return mean, (mean - half, mean + half)


# single-driver shape --------------------------------------------------------


def single_chance_driver(net: Network) -> Node:
    chance = [n for n in net.nodes if n.kind is NodeKind.CHANCE]
    if len(chance) != 1:
        raise UnsupportedShapeError(
            f"query needs exactly one chance node, model has {len(chance)}"
        )
    return chance[0]


def single_equation_node(net: Network) -> Node:
    eqs = [n for n in net.nodes if n.kind is NodeKind.EQUATION]
    if len(eqs) != 1:
        raise UnsupportedShapeError(
            f"query needs exactly one equation node, model has {len(eqs)}"
        )
    return eqs[0]


def resolve_discrete_assignment(net: Network, driver_state: str) -> dict[str, str]:
    """States of every discrete node once the single chance driver is fixed."""
    driver = single_chance_driver(net)
    if driver_state not in driver.states:
        raise EvidenceError(f"node {driver.name!r} has no state {driver_state!r}")
    assigned = {driver.name: driver_state}
    by_name = net.node_map()
    for name in topological_order(net):
        node = by_name[name]
        if node.kind is NodeKind.DETERMINISTIC:
            parent_states = tuple(assigned[p] for p in node.parents)
            assigned[name] = resolve_deterministic(node, parent_states)
    return assigned


def selected_branches(net: Network, driver_state: str) -> list[DistTerm]:
    """The one distribution term each Choose picks when the driver is fixed."""
    eq = single_equation_node(net)
    assigned = resolve_discrete_assignment(net, driver_state)
    by_name = net.node_map()
    assert eq.expr is not None
    picked = []
    for term in eq.expr.terms:
        sel = by_name[term.selector]
        picked.append(term.branches[sel.states.index(assigned[term.selector])])
    return picked


def analytic_state_mean(net: Network, driver_state: str) -> float:
    """Closed-form equation mean with the driver clamped to one state."""
    return sum(b.mean_variance()[0] for b in selected_branches(net, driver_state))


def analytic_state_sd(net: Network, driver_state: str) -> float:
    return math.sqrt(sum(b.mean_variance()[1] for b in selected_branches(net, driver_state)))


def analytic_mixture_mean(net: Network) -> float:
    """Prior-weighted average of the per-state closed-form means."""
    driver = single_chance_driver(net)
    assert driver.prior is not None
    return sum(
        p * analytic_state_mean(net, s) for p, s in zip(driver.prior, driver.states)
    )


# exact discrete inference ---------------------------------------------------


def discrete_posterior_exact(
    net: Network, evidence: dict[str, str] | None = None
) -> PosteriorReport:
    """Exact per-node posteriors by enumerating the joint discrete space."""
    evidence = dict(evidence or {})
    _check_discrete_evidence(net, evidence)
    by_name = net.node_map()
    order = topological_order(net)
    discrete = [by_name[nm] for nm in order if by_name[nm].kind is not NodeKind.EQUATION]
    chance = [nd for nd in discrete if nd.kind is NodeKind.CHANCE]

    marginals = {nd.name: np.zeros(len(nd.states)) for nd in discrete}
    total = 0.0
    for combo in itertools.product(*[nd.states for nd in chance]):
        assigned = dict(zip((nd.name for nd in chance), combo))
        weight = 1.0
        for nd in discrete:
            if nd.kind is NodeKind.CHANCE:
                s = assigned[nd.name]
                if not nd.parents:
                    weight *= nd.prior[nd.states.index(s)]
                else:
                    row = nd.cpt[tuple(assigned[p] for p in nd.parents)]
                    weight *= row[nd.states.index(s)]
            else:
                assigned[nd.name] = resolve_deterministic(
                    nd, tuple(assigned[p] for p in nd.parents)
                )
        if weight == 0.0:
            continue
        if any(assigned[k] != v for k, v in evidence.items()):
            continue
        total += weight
        for nd in discrete:
            marginals[nd.name][nd.states.index(assigned[nd.name])] += weight

    if total == 0.0:
        raise InconsistentEvidenceError(
            f"evidence {evidence} has zero probability under the model"
        )
    probabilities = {
        nd.name: dict(zip(nd.states, (marginals[nd.name] / total).tolist()))
        for nd in discrete
    }
    return PosteriorReport(method=METHOD_EXACT, probabilities=probabilities)


# continuous evidence --------------------------------------------------------


def conditional_density_grid(
    net: Network, driver_state: str, grid_step: float = DEFAULT_GRID_STEP
) -> tuple[np.ndarray, np.ndarray]:
    """Density of the equation node given the driver state, by discretizing
    each selected branch pdf on [0, mean + 12 SD] and convolving the branches."""
    if grid_step <= 0:
        raise ValueError(f"grid_step must be positive, got {grid_step}")
    branch_pdfs = []
    for branch in selected_branches(net, driver_state):
        mean, var = branch.mean_variance()
        upper = mean + 12.0 * math.sqrt(var)
        points = int(math.ceil(upper / grid_step)) + 1
        grid = np.arange(points) * grid_step
        f = branch.pdf(grid)
        mass = f.sum() * grid_step
        if mass <= 0.0:
            raise ValueError(
                f"grid_step {grid_step} too coarse to resolve a branch of width "
                f"{upper:.3g}"
            )
        branch_pdfs.append(f / mass)  # remove discretization mass error
    density = branch_pdfs[0]
    for f in branch_pdfs[1:]:
        density = np.convolve(density, f) * grid_step
    density = density / (density.sum() * grid_step)
    return np.arange(density.size) * grid_step, density


def conditional_density(
    net: Network, driver_state: str, value: float, grid_step: float = DEFAULT_GRID_STEP
) -> float:
    grid, density = conditional_density_grid(net, driver_state, grid_step)
    return float(np.interp(value, grid, density, left=0.0, right=0.0))


def _gaussian_kde_at(values: np.ndarray, x: float, bandwidth: float) -> float:
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    z = (x - values) / bandwidth
    return float(np.exp(-0.5 * z * z).mean() / (bandwidth * math.sqrt(2.0 * math.pi)))


def posterior_given_equation_evidence(
    net: Network,
    value: float,
    method: str = METHOD_CONVOLUTION,
    *,
    bandwidth: float = DEFAULT_BANDWIDTH,
    n: int = 100_000,
    seed: int = 0,
    grid_step: float = DEFAULT_GRID_STEP,
) -> PosteriorReport:
    """Posterior over every discrete node given an observed equation value:
    P(state | value) proportional to prior(state) * density(value | state)."""
    driver = single_chance_driver(net)
    single_equation_node(net)
    if method == METHOD_CONVOLUTION:
        densities = [conditional_density(net, s, value, grid_step) for s in driver.states]
    elif method == METHOD_KDE:
        densities = []
        for s in driver.states:
            ss = forward_sample(net, n, seed, {driver.name: s})
            densities.append(_gaussian_kde_at(ss.values, value, bandwidth))
    else:
        raise ValueError(f"unknown method {method!r}")

    assert driver.prior is not None
    weights = [p * d for p, d in zip(driver.prior, densities)]
    total = sum(weights)
    if total <= 0.0:
        raise UndefinedPosteriorError(
            f"every state assigns zero density to value {value}"
        )
    driver_post = [w / total for w in weights]

    probabilities = {driver.name: dict(zip(driver.states, driver_post))}
    by_name = net.node_map()
    for node in net.nodes:
        if node.kind is not NodeKind.DETERMINISTIC:
            continue
        acc = dict.fromkeys(node.states, 0.0)
        for p, s in zip(driver_post, driver.states):
            assigned = resolve_discrete_assignment(net, s)
            acc[assigned[node.name]] += p
        probabilities[node.name] = acc
    return PosteriorReport(method=method, probabilities=probabilities)


# weights ---------------------------------------------------------------------


def reweight_equation(
    net: Network,
    weights,
    base_weights=DEFAULT_BASE_WEIGHTS,
) -> Network:
    """Rebuild the net with each Choose term (declaration order) rescaled by
    weights[i]/base_weights[i]. A zero weight drops that term."""
    eq = single_equation_node(net)
    assert eq.expr is not None
    terms = eq.expr.terms
    if len(weights) != len(terms) or len(base_weights) != len(terms):
        raise ValueError(
            f"need one weight per Choose term ({len(terms)}), got {len(weights)}"
        )
    if any(w < 0 for w in weights):
        raise ValueError("weights must be nonnegative")
    if all(w == 0 for w in weights):
        raise ValueError("at least one weight must be positive")
    if any(w0 <= 0 for w0 in base_weights):
        raise ValueError("base weights must be positive")

    rebuilt = []
    for term, w, w0 in zip(terms, weights, base_weights):
        if w == 0:
            continue
        ratio = w / w0
        rebuilt.append(
            ChooseTerm(term.selector, tuple(b.scaled(ratio) for b in term.branches))
        )
    new_eq = replace(eq, expr=EquationExpr(terms=tuple(rebuilt)))
    return Network(net.name, [new_eq if nd is eq else nd for nd in net.nodes])


@dataclass
class SensitivityRow:
    split: tuple[float, float]
    mc_mean: float
    analytic_mean: float


def weight_sensitivity(
    net: Network,
    splits,
    n: int = 10_000,
    seed: int = 0,
    price_weight: float = 0.25,
) -> list[SensitivityRow]:
    """Equation mean under alternative (promotions, location) weight splits;
    the first term's weight stays fixed and each split must sum to the rest."""
    remainder = 1.0 - price_weight
    rows = []
    for wp, wl in splits:
        if abs(wp + wl - remainder) > 1e-9:
            raise ValueError(
                f"split ({wp}, {wl}) must sum to {remainder:.6g}"
            )
        rebuilt = reweight_equation(net, (price_weight, wp, wl))
        ss = forward_sample(rebuilt, n, seed)
        rows.append(
            SensitivityRow(
                split=(wp, wl),
                mc_mean=float(ss.values.mean()),
                analytic_mean=analytic_mixture_mean(rebuilt),
            )
        )
    return rows


# evidence reduction for conditional forecasting ------------------------------


def reduce_evidence_to_clamps(
    net: Network, evidence: dict[str, str]
) -> tuple[Network, dict[str, str]]:
    """Turn discrete evidence into chance-node clamps for forward sampling.

    Evidence on deterministic nodes is inverted through the single chance
    driver: driver states incompatible with the observation are zeroed out
    of the prior (exact for single-driver models)."""
    _check_discrete_evidence(net, evidence)
    by_name = net.node_map()
    chance_ev = {k: v for k, v in evidence.items() if by_name[k].kind is NodeKind.CHANCE}
    det_ev = {k: v for k, v in evidence.items() if by_name[k].kind is NodeKind.DETERMINISTIC}
    if not det_ev:
        return net, chance_ev

    driver = single_chance_driver(net)
    compatible = []
    for state in driver.states:
        assigned = resolve_discrete_assignment(net, state)
        if all(assigned[k] == v for k, v in det_ev.items()):
            compatible.append(state)
    if driver.name in chance_ev:
        compatible = [s for s in compatible if s == chance_ev[driver.name]]
    if not compatible:
        raise InconsistentEvidenceError(
            f"evidence {evidence} has zero probability under the model"
        )
    if len(compatible) == 1:
        chance_ev[driver.name] = compatible[0]
        return net, chance_ev

    assert driver.prior is not None
    mass = sum(p for p, s in zip(driver.prior, driver.states) if s in compatible)
    if mass <= 0:
        raise InconsistentEvidenceError(
            f"evidence {evidence} has zero probability under the model"
        )
    new_prior = tuple(
        (p / mass if s in compatible else 0.0)
        for p, s in zip(driver.prior, driver.states)
    )
    conditioned = replace(driver, prior=new_prior)
    new_net = Network(net.name, [conditioned if nd is driver else nd for nd in net.nodes])
    chance_ev.pop(driver.name, None)
    return new_net, chance_ev
