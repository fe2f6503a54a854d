from functools import lru_cache
from typing import Optional

from fastapi import HTTPException, status

from app.config import settings
from app.core.exceptions import RobustnessError
from app.core.graph import Graph
from app.logging_config import get_logger
from app.models.nrlgt import NRLGT
from app.schemas.api import GraphPayload

logger = get_logger(__name__)


@lru_cache(maxsize=4)
def _load_model(path: str) -> NRLGT:
    logger.info("model_loaded", path=path)
    return NRLGT.load(path)


def get_model() -> NRLGT:
    """Model served by the API, loaded once from MODEL_CHECKPOINT."""
    path: Optional[str] = settings.MODEL_CHECKPOINT
    if not path:
        raise HTTPException(
            status_code=status.HTTP_503_SERVICE_UNAVAILABLE,
            detail="No model checkpoint configured (set MODEL_CHECKPOINT)",
        )
    try:
        return _load_model(path)
    except RobustnessError as e:
        logger.error("model_load_failed", path=path, error=str(e))
        raise HTTPException(
            status_code=status.HTTP_503_SERVICE_UNAVAILABLE,
            detail=f"Model checkpoint could not be loaded: {e}",
        )


def to_graph(payload: GraphPayload) -> Graph:
    """Validate a request graph and build it.

    Raises:
        HTTPException: 400 for oversized or malformed graphs.
    """
    if payload.n > settings.MAX_API_NODES:
        logger.warning("graph_too_large", n=payload.n, limit=settings.MAX_API_NODES)
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"Graph has {payload.n} nodes; the limit is {settings.MAX_API_NODES}",
        )
    if payload.weights is not None and len(payload.weights) != len(payload.edges):
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail="weights must have one entry per edge",
        )
    weights = payload.weights or [1.0] * len(payload.edges)
    edges = [(u, v, w) for (u, v), w in zip(payload.edges, weights)]
    try:
        return Graph.from_edges(payload.n, edges, payload.directed)
    except RobustnessError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
