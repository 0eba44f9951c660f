import json
import logging

from medialkit.core.config import Settings
from medialkit.core.logging.context import get_logging_context, set_run_context
from medialkit.core.logging.logging_config import JSONFormatter, setup_logging


def test_json_formatter_carries_context_and_extras():
    set_run_context(run_id="run-1", command="distance", scene="circle")
    record = logging.getLogger("medialkit.test").makeRecord(
        "medialkit.test", logging.INFO, __file__, 10, "scan finished", None, None,
        extra={"event": "medial_scan", "samples": 3},
    )
    doc = json.loads(JSONFormatter().format(record))
    assert doc["message"] == "scan finished"
    assert doc["run_id"] == "run-1"
    assert doc["scene"] == "circle"
    assert doc["event"] == "medial_scan"
    assert doc["samples"] == 3


def test_context_defaults():
    set_run_context(run_id="run-2")
    assert get_logging_context() == {"run_id": "run-2", "command": None, "scene": None}


def test_file_logging_writes_json(tmp_path):
    settings = Settings(log_dir=tmp_path, log_file="t.log", log_to_file=True, log_level="DEBUG")
    root = logging.getLogger("medialkit")
    saved = list(root.handlers)
    for h in saved:
        root.removeHandler(h)
    try:
        setup_logging(settings)
        setup_logging(settings)
        names = [h.name for h in root.handlers]
        assert names.count("medialkit.console") == 1
        logging.getLogger("medialkit.test").info("hello", extra={"event": "probe"})
        for h in root.handlers:
            h.flush()
        lines = (tmp_path / "t.log").read_text(encoding="utf-8").splitlines()
        assert json.loads(lines[-1])["event"] == "probe"
    finally:
        for h in list(root.handlers):
            h.close()
            root.removeHandler(h)
        for h in saved:
            root.addHandler(h)
