from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Application
    APP_NAME: str = "NetRobust"
    DEBUG: bool = False
    LOG_JSON: bool = True

    # HTTP service
    MODEL_CHECKPOINT: Optional[str] = None
    MAX_API_NODES: int = 2000

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True
    )


settings = Settings()
