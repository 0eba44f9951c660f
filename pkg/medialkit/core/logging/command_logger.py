import functools
import time
import uuid
from typing import Callable

import typer

from medialkit.core.logging.context import set_run_context
from medialkit.core.logging.run_logger import get_run_logger


logger = get_run_logger("cli")


# Logging every CLI command with its run context
def logged_command(name: str) -> Callable:
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):

            # 1️⃣ Generating run correlation ID
            run_id = str(uuid.uuid4())
            start_time = time.time()

            # 2️⃣ Storing context for the whole command: services log with it
            scene = kwargs.get("scene") or kwargs.get("suite")
            set_run_context(run_id=run_id, command=name, scene=scene)

            # 3️⃣ Running the command, recording how it ended
            exit_code = 0
            try:
                return func(*args, **kwargs)
            except typer.Exit as exc:
                exit_code = exc.exit_code
                raise
            except Exception:
                exit_code = 2
                raise
            finally:
                # 4️⃣ Measuring latency and logging the summary
                process_time = round(time.time() - start_time, 4)
                logger.info(
                    "command processed",
                    extra={
                        "event": "cli_command",
                        "arguments": {k: str(v) for k, v in kwargs.items()},
                        "exit_code": exit_code,
                        "latency_seconds": process_time,
                    },
                )

        return wrapper

    return decorator
