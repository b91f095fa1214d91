import logging
import sys

_TAGS = {
    logging.DEBUG: "debug",
    logging.INFO: "info",
    logging.WARNING: "warn",
    logging.ERROR: "error",
    logging.CRITICAL: "error",
}


class _TagFormatter(logging.Formatter):
    """Renders records as ``[warn] message`` the way the batch scripts print."""

    def format(self, record):
        tag = _TAGS.get(record.levelno, record.levelname.lower())
        msg = record.getMessage()
        if record.exc_info and record.levelno >= logging.ERROR:
            msg = f"{msg}\n{self.formatException(record.exc_info)}"
        return f"[{tag}] {msg}"


def configure_logging(level: str = "info") -> None:
    levels = {"debug": logging.DEBUG, "info": logging.INFO, "warn": logging.WARNING,
              "warning": logging.WARNING, "error": logging.ERROR}
    lvl = levels.get(str(level).lower(), logging.INFO)
    root = logging.getLogger("geoops")
    for h in list(root.handlers):
        root.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_TagFormatter())
    root.addHandler(handler)
    root.setLevel(lvl)
    root.propagate = False
