import glob
import json
import logging
import os
from datetime import datetime, timedelta, timezone
from logging.handlers import TimedRotatingFileHandler

from medialkit.core.config import Settings, get_settings
from medialkit.core.logging.context import get_logging_context


FILE_HANDLER_NAME = "medialkit.file"
CONSOLE_HANDLER_NAME = "medialkit.console"

# Attributes every LogRecord carries; anything else came in through `extra=`
_RECORD_ATTRS = set(vars(logging.makeLogRecord({}))) | {"message", "asctime", "taskName"}


# ✅ == JSON Log Formatter ==
class JSONFormatter(logging.Formatter):

    """
    Structured JSON formatter for logs.
    Run context (run_id, command, scene) is attached to every line.
    """

    def format(self, record: logging.LogRecord) -> str:
        log_record = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "filename": record.filename,
            "line": record.lineno,
            "funcName": record.funcName,
        }
        log_record.update({k: v for k, v in get_logging_context().items() if v is not None})

        # Structured fields passed with extra={...}
        for key, value in record.__dict__.items():
            if key not in _RECORD_ATTRS and key not in log_record:
                log_record[key] = value

        if record.exc_info:
            log_record["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_record, ensure_ascii=False, default=str)


# ===✅ Log Cleanup ===
def cleanup_old_logs(
    log_dir: str,
    retention_days: int
) -> None:
    """
    Deletes log files older than retention_days.
    TimedRotatingFileHandler only prunes on rotation, not on startup.
    """
    cutoff_time = datetime.now(timezone.utc) - timedelta(days=retention_days)

    for path in glob.glob(os.path.join(log_dir, "*.log*")):
        try:
            mtime = datetime.fromtimestamp(
                os.path.getmtime(path), timezone.utc)
            if mtime < cutoff_time:
                os.remove(path)
        except OSError as exc:
            logging.warning(
                "Failed to delete old log file %s: %s", path, exc
            )


# ===✅ Log Setup ===
def setup_logging(settings: Settings | None = None) -> None:
    """
    Global logging setup:
    - JSON file logging (optional)
    - Console logging on stderr, stdout stays reserved for reports
    - Daily rotation at UTC midnight
    - Retention from settings
    """
    settings = settings or get_settings()
    level = getattr(logging, settings.log_level.upper(), logging.INFO)

    root_logger = logging.getLogger("medialkit")
    root_logger.setLevel(level)

    # Prevent duplicate handlers on repeated runs in one process
    installed = {h.name for h in root_logger.handlers}
    if CONSOLE_HANDLER_NAME in installed:
        return

    # == File Handler ==
    if settings.log_to_file:
        os.makedirs(settings.log_dir, exist_ok=True)
        cleanup_old_logs(str(settings.log_dir), settings.log_retention_days)

        file_handler = TimedRotatingFileHandler(
            filename=os.path.join(settings.log_dir, settings.log_file),
            when="midnight",
            interval=1,
            backupCount=settings.log_retention_days,
            encoding="utf-8",
            utc=True,
            delay=True      # File opens only when first log is written
        )
        file_handler.name = FILE_HANDLER_NAME
        file_handler.setLevel(level)
        file_handler.setFormatter(JSONFormatter())
        root_logger.addHandler(file_handler)

    # == Console Handler ==
    console_handler = logging.StreamHandler()
    console_handler.name = CONSOLE_HANDLER_NAME
    console_handler.setLevel(logging.WARNING if level < logging.WARNING else level)
    console_handler.setFormatter(
        logging.Formatter(
            "[%(asctime)s] [%(levelname)s] %(name)s: %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S"
        )
    )
    root_logger.addHandler(console_handler)

    root_logger.info("✅ Logging system initialized.")
