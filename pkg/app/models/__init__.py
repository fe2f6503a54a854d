from app.models.graphview import GraphView
from app.models.encoder import DegreeCentralityEncoder
from app.models.gt_layer import ClassicalAttentionLayer, GTLayer, make_layer
from app.models.heads import ClassHead, CurveHead, RcHead
from app.models.nrlgt import NRLGT

__all__ = [
    "GraphView",
    "DegreeCentralityEncoder",
    "ClassicalAttentionLayer",
    "GTLayer",
    "make_layer",
    "ClassHead",
    "CurveHead",
    "RcHead",
    "NRLGT",
]
