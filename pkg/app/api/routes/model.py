from fastapi import APIRouter, Depends

from app.api.deps import get_model, to_graph
from app.logging_config import get_logger
from app.models.nrlgt import NRLGT
from app.schemas.api import PredictRequest
from app.schemas.model import Prediction

router = APIRouter()
logger = get_logger(__name__)


@router.post("/predict", response_model=Prediction)
def predict(request: PredictRequest, model: NRLGT = Depends(get_model)):
    """Predicted curve (when the graph matches the curve head size), R̂c and topology class."""
    g = to_graph(request.graph)
    prediction = model.predict(g)
    logger.info(
        "prediction_completed",
        n=g.n,
        label=prediction.label.value,
        rc=prediction.rc,
        has_curve=prediction.curve is not None,
    )
    return prediction
