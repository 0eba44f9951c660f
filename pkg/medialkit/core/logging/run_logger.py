import logging


def get_run_logger(name: str) -> logging.Logger:
    """
    A standard logger factory for services and commands
    """
    return logging.getLogger(f"medialkit.{name}")
