import time
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.config import settings
from app.core.exceptions import RobustnessError
from app.logging_config import configure_logging, get_logger
from app.api.routes import model, oracle

configure_logging()
logger = get_logger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    logger.info(
        "application_started",
        app_name=settings.APP_NAME,
        model_checkpoint=settings.MODEL_CHECKPOINT,
        max_api_nodes=settings.MAX_API_NODES,
    )
    yield
    logger.info("application_shutdown")


app = FastAPI(
    title=settings.APP_NAME,
    debug=settings.DEBUG,
    lifespan=lifespan,
)


@app.middleware("http")
async def log_requests(request: Request, call_next):
    """Log every request with its status and wall time."""
    started = time.perf_counter()
    response = await call_next(request)
    logger.info(
        "request_completed",
        method=request.method,
        path=request.url.path,
        status_code=response.status_code,
        duration_ms=round((time.perf_counter() - started) * 1000, 2),
    )
    return response


@app.exception_handler(RobustnessError)
async def robustness_error_handler(request: Request, exc: RobustnessError):
    """Oracle and model errors raised below the routes are client errors."""
    logger.warning(
        "request_rejected",
        path=request.url.path,
        error_type=type(exc).__name__,
        error=str(exc),
    )
    return JSONResponse(status_code=status.HTTP_400_BAD_REQUEST, content={"detail": str(exc)})


app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)

app.include_router(oracle.router, prefix="/api/oracle", tags=["oracle"])
app.include_router(model.router, prefix="/api/model", tags=["model"])


@app.get("/health")
def health_check():
    return {"status": "healthy", "model_configured": bool(settings.MODEL_CHECKPOINT)}
