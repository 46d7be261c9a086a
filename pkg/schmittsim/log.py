import json
import logging
import sys

# -------------------------
# LEVELS
# -------------------------
SUCCESS = 25
logging.addLevelName(SUCCESS, "SUCCESS")

COLORS = {
    "DEBUG": "\033[90m",      # grey
    "INFO": "\033[0m",        # default
    "WARNING": "\033[93m",    # yellow
    "ERROR": "\033[31m",      # red
    "CRITICAL": "\033[91;1m", # bright red + bold
    "SUCCESS": "\033[92m"     # green
}

RESET = "\033[0m"


# -------------------------
# CONSOLE LOGGING
# -------------------------
class AnsiFormatter(logging.Formatter):
    def __init__(self, use_color: bool = True):
        super().__init__()
        self.use_color = use_color

    def format(self, record: logging.LogRecord):
        msg = record.getMessage()
        if record.exc_info:
            msg = f"{msg}\n{self.formatException(record.exc_info)}"
        if not self.use_color:
            return msg
        color = COLORS.get(record.levelname, RESET)
        return f"{color}{msg}{RESET}"


class JsonHandler(logging.StreamHandler):
    """One JSON object per record. Extra fields passed through ``extra={"data": {...}}``
    are merged into the object."""

    def emit(self, record):
        log_obj = {"level": record.levelname, "logger": record.name, "msg": record.getMessage()}
        data = getattr(record, "data", None)
        if isinstance(data, dict):
            log_obj.update(data)
        try:
            self.stream.write(json.dumps(log_obj) + "\n")
            self.flush()
        except Exception:
            self.handleError(record)


def setup_logging(json_mode: bool = False, debug: bool = False, stream=None) -> logging.Logger:
    stream = stream if stream is not None else sys.stderr
    log = logging.getLogger("schmittsim")

    for h in list(log.handlers):
        log.removeHandler(h)

    if json_mode:
        handler = JsonHandler(stream)
    else:
        handler = logging.StreamHandler(stream)
        handler.setFormatter(AnsiFormatter(use_color=stream.isatty() if hasattr(stream, "isatty") else False))

    log.addHandler(handler)
    log.setLevel(debug and logging.DEBUG or logging.INFO)
    log.propagate = False
    return log


def success(logger: logging.Logger, msg: str, *args, **kwargs):
    logger.log(SUCCESS, msg, *args, **kwargs)
