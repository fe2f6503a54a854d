from fastapi import APIRouter, HTTPException, status

from app.api.deps import to_graph
from app.core.attacks import plan_attack
from app.core.exceptions import RobustnessError
from app.core.robustness import batch_curve, overall_rc, robustness_curve
from app.core.spectral import spectral_measures
from app.logging_config import get_logger
from app.schemas.api import (
    AttackRequest,
    AttackResponse,
    CurveRequest,
    CurveResponse,
    GraphPayload,
    SpectralResponse,
)

router = APIRouter()
logger = get_logger(__name__)


@router.post("/curve", response_model=CurveResponse)
def simulate_curve(request: CurveRequest):
    """Simulate an attack and return the true robustness curve."""
    g = to_graph(request.graph)
    logger.info(
        "curve_simulation_started",
        n=g.n,
        attack=request.strategy.kind.value,
        kind=request.kind.value,
        batch_fraction=request.batch_fraction,
    )
    try:
        if g.n < 2:
            raise RobustnessError("a robustness curve needs at least 2 nodes")
        if request.batch_fraction is not None:
            curve = batch_curve(g, request.strategy, request.batch_fraction, request.kind, request.mode)
            order = []
        else:
            trace = plan_attack(g, request.strategy)
            curve = robustness_curve(g, trace, request.kind, request.mode)
            order = trace.order
        rc = overall_rc(curve).r_c
    except RobustnessError as e:
        logger.warning("curve_simulation_rejected", error=str(e))
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))

    return CurveResponse(kind=request.kind, values=curve.values.tolist(), rc=rc, order=order)


@router.post("/attack", response_model=AttackResponse)
def plan(request: AttackRequest):
    """Return the removal order of an attack."""
    g = to_graph(request.graph)
    trace = plan_attack(g, request.strategy)
    logger.info("attack_planned", n=g.n, attack=request.strategy.kind.value, steps=len(trace))
    return AttackResponse(kind=request.strategy.kind, order=trace.order)


@router.post("/spectral", response_model=SpectralResponse)
def spectral(graph: GraphPayload):
    """Spectral robustness measures of the (symmetrized, unweighted) graph."""
    g = to_graph(graph)
    try:
        measures = spectral_measures(g)
    except RobustnessError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    return SpectralResponse(**measures)
