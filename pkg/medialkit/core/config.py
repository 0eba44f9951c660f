from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


BASE_DIR = Path(__file__).resolve().parent.parent
REPO_ROOT = BASE_DIR.parent
ENV_PATH = REPO_ROOT / ".env"


class Settings(BaseSettings):
    # SCENES
    scenes: Path = Field(REPO_ROOT / "scenes", description="directory scene names resolve against")

    # LOGGING
    log_dir: Path = Field(Path("logs"))
    log_file: str = Field("medialkit.log")
    log_level: str = Field("INFO")
    log_retention_days: int = Field(5, ge=1)
    log_to_file: bool = Field(True)

    model_config = SettingsConfigDict(
        env_prefix="MEDIALKIT_",
        env_file=ENV_PATH,
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache
def get_settings() -> Settings:
    return Settings()
