"""JSON-over-HTTP what-if service.

Sessions are created from DSL text and hold only the parsed model, current
evidence, optional equation weights, and a master seed; engine calls are
stateless, so identical (network, evidence, seed, n) inputs produce
identical responses. Requests within one session are serialized by a lock;
different sessions are fully concurrent.
"""

from __future__ import annotations

import os
import threading
import uuid
from dataclasses import replace

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, model_validator

from .dsl import parse_network, serialize_network
from .errors import EvidenceError, ModelError
from .inference import (
    DEFAULT_BANDWIDTH,
    METHOD_CONVOLUTION,
    METHOD_KDE,
    ContinuousEvidence,
    Evidence,
    analytic_mixture_mean,
    discrete_posterior_exact,
    equation_mean_ci,
    forward_sample,
    posterior_given_equation_evidence,
    reduce_evidence_to_clamps,
    reweight_equation,
)
from .network import Network, NodeKind

DEFAULT_PORT = 8080
HISTOGRAM_BINS = 50  # fixed layout shared by the CLI and the UI


def default_port() -> int:
    return int(os.environ.get("PROMO_BN_PORT", DEFAULT_PORT))


# request / response models ----------------------------------------------------


class CreateSessionRequest(BaseModel):
    dsl: str
    seed: int = 42


class NodeInfo(BaseModel):
    name: str
    kind: str
    states: list[str]
    parents: list[str]


class SessionInfo(BaseModel):
    session_id: str
    name: str
    nodes: list[NodeInfo]


class NetworkView(BaseModel):
    name: str
    nodes: list[NodeInfo]
    dsl: str


class EvidenceRequest(BaseModel):
    node: str
    state: str | None = None
    value: float | None = None
    bandwidth: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _one_of_state_or_value(self) -> "EvidenceRequest":
        if (self.state is None) == (self.value is None):
            raise ValueError("provide exactly one of 'state' or 'value'")
        if self.bandwidth is not None and self.value is None:
            raise ValueError("'bandwidth' only applies to value evidence")
        return self


class ContinuousEvidenceView(BaseModel):
    node: str
    value: float
    bandwidth: float


class EvidenceView(BaseModel):
    discrete: dict[str, str]
    continuous: ContinuousEvidenceView | None


class StateProbability(BaseModel):
    state: str
    probability: float


class PosteriorsResponse(BaseModel):
    method: str
    posteriors: dict[str, list[StateProbability]]


class HistogramData(BaseModel):
    edges: list[float]  # BINS + 1 boundaries
    counts: list[int]


class ForecastResponse(BaseModel):
    n: int
    seed: int
    mean: float
    ci: tuple[float, float]
    histogram: HistogramData
    evidence: EvidenceView


class WeightsRequest(BaseModel):
    price: float = Field(ge=0)
    promotions: float = Field(ge=0)
    location: float = Field(ge=0)

    @model_validator(mode="after")
    def _sums_to_one(self) -> "WeightsRequest":
        total = self.price + self.promotions + self.location
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {total}")
        return self


class WeightsResponse(BaseModel):
    weights: WeightsRequest
    analytic_mean: float


# session state ----------------------------------------------------------------


class Session:
    def __init__(self, network: Network, seed: int):
        self.base_network = network
        self.network = network
        self.evidence = Evidence()
        self.seed = seed
        self.lock = threading.Lock()


def _evidence_view(evidence: Evidence) -> EvidenceView:
    cont = None
    if evidence.continuous is not None:
        cont = ContinuousEvidenceView(
            node=evidence.continuous.node,
            value=evidence.continuous.value,
            bandwidth=evidence.continuous.bandwidth,
        )
    return EvidenceView(discrete=dict(evidence.discrete), continuous=cont)


def _node_infos(net: Network) -> list[NodeInfo]:
    return [
        NodeInfo(
            name=n.name, kind=n.kind.value, states=list(n.states), parents=list(n.parents)
        )
        for n in net.nodes
    ]


def create_app() -> FastAPI:
    app = FastAPI(title="promobn what-if service")
    # the dashboard is served statically from another origin; no auth here
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def _validation_to_400(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc.errors())})

    @app.exception_handler(ValueError)
    async def _engine_error_to_400(request: Request, exc: ValueError):
        # covers ParseError, EvidenceError, ModelError, UndefinedPosteriorError
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    def get_session(session_id: str) -> Session:
        sess = sessions.get(session_id)
        if sess is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return sess

    @app.post("/sessions", response_model=SessionInfo, status_code=201)
    def create_session(body: CreateSessionRequest):
        net = parse_network(body.dsl)
        session_id = uuid.uuid4().hex
        with registry_lock:
            sessions[session_id] = Session(net, body.seed)
        return SessionInfo(session_id=session_id, name=net.name, nodes=_node_infos(net))

    @app.get("/sessions/{session_id}/network", response_model=NetworkView)
    def get_network(session_id: str):
        sess = get_session(session_id)
        with sess.lock:
            return NetworkView(
                name=sess.network.name,
                nodes=_node_infos(sess.network),
                dsl=serialize_network(sess.network),
            )

    @app.post("/sessions/{session_id}/evidence", response_model=EvidenceView)
    def set_evidence(session_id: str, body: EvidenceRequest):
        sess = get_session(session_id)
        with sess.lock:
            net = sess.network
            try:
                node = net.node(body.node)
            except KeyError:
                raise EvidenceError(f"evidence names unknown node {body.node!r}")
            if body.state is not None:
                if node.kind is NodeKind.EQUATION:
                    raise EvidenceError(
                        f"{body.node} is an equation node; send a 'value' observation"
                    )
                if body.state not in node.states:
                    raise EvidenceError(f"node {body.node!r} has no state {body.state!r}")
                sess.evidence.discrete[body.node] = body.state
            else:
                if node.kind is not NodeKind.EQUATION:
                    raise EvidenceError(
                        f"{body.node} is discrete; send a 'state' observation"
                    )
                sess.evidence.continuous = ContinuousEvidence(
                    node=body.node,
                    value=body.value,
                    bandwidth=body.bandwidth or DEFAULT_BANDWIDTH,
                )
            return _evidence_view(sess.evidence)

    @app.delete("/sessions/{session_id}/evidence", response_model=EvidenceView)
    def clear_evidence(session_id: str):
        sess = get_session(session_id)
        with sess.lock:
            sess.evidence = Evidence()
            return _evidence_view(sess.evidence)

    @app.get("/sessions/{session_id}/posteriors", response_model=PosteriorsResponse)
    def get_posteriors(
        session_id: str,
        method: str = Query(default=METHOD_CONVOLUTION),
        n: int = Query(default=100_000, ge=1),
    ):
        sess = get_session(session_id)
        with sess.lock:
            report = _compute_posteriors(sess, method, n)
        posteriors = {
            node: [StateProbability(state=s, probability=p) for s, p in probs.items()]
            for node, probs in report.probabilities.items()
        }
        return PosteriorsResponse(method=report.method, posteriors=posteriors)

    @app.get("/sessions/{session_id}/forecast", response_model=ForecastResponse)
    def get_forecast(
        session_id: str,
        n: int = Query(default=10_000, ge=2),
        seed: int | None = Query(default=None),
    ):
        sess = get_session(session_id)
        with sess.lock:
            run_seed = sess.seed if seed is None else seed
            net, clamps = reduce_evidence_to_clamps(sess.network, sess.evidence.discrete)
            samples = forward_sample(net, n, run_seed, clamps)
            if samples.values is None:
                raise ModelError("model has no equation node to forecast")
            mean, ci = equation_mean_ci(samples)
            counts, edges = np.histogram(samples.values, bins=HISTOGRAM_BINS)
            return ForecastResponse(
                n=n,
                seed=run_seed,
                mean=mean,
                ci=ci,
                histogram=HistogramData(
                    edges=[float(e) for e in edges],
                    counts=[int(c) for c in counts],
                ),
                evidence=_evidence_view(sess.evidence),
            )

    @app.post("/sessions/{session_id}/weights", response_model=WeightsResponse)
    def set_weights(session_id: str, body: WeightsRequest):
        sess = get_session(session_id)
        with sess.lock:
            sess.network = reweight_equation(
                sess.base_network, (body.price, body.promotions, body.location)
            )
            return WeightsResponse(
                weights=body, analytic_mean=analytic_mixture_mean(sess.network)
            )

    return app


def _compute_posteriors(sess: Session, method: str, n: int):
    net = sess.network
    evidence = sess.evidence
    if evidence.continuous is None:
        return discrete_posterior_exact(net, evidence.discrete)

    if method not in (METHOD_CONVOLUTION, METHOD_KDE):
        raise ValueError(f"unknown method {method!r}")
    conditioned, clamps = reduce_evidence_to_clamps(net, evidence.discrete)
    for name, state in clamps.items():
        node = conditioned.node(name)
        one_hot = tuple(1.0 if s == state else 0.0 for s in node.states)
        pinned = replace(node, prior=one_hot)
        conditioned = Network(
            conditioned.name,
            [pinned if nd is node else nd for nd in conditioned.nodes],
        )
    return posterior_given_equation_evidence(
        conditioned,
        evidence.continuous.value,
        method,
        bandwidth=evidence.continuous.bandwidth,
        n=n,
        seed=sess.seed,
    )


app = create_app()


def serve(port: int | None = None, host: str = "127.0.0.1") -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(app, host=host, port=port if port is not None else default_port())
