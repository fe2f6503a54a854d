from app.api.routes import model, oracle

__all__ = ["model", "oracle"]
