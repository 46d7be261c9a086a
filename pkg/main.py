import logging
import sys
from pathlib import Path

import json5

from schmittsim.cli.core import dispatch
from schmittsim.log import setup_logging

# -------------------------
# CONFIG
# -------------------------
CONFIG_DIR = Path(__file__).parent


def load_config() -> dict:
    # prefer .json5, fall back to .json
    for ext in ("json5", "json"):
        candidate = CONFIG_DIR / f"config.{ext}"
        if not candidate.exists():
            continue
        try:
            with open(candidate, "r", encoding="utf-8") as f:
                return json5.load(f)
        except Exception as e:
            logging.getLogger("schmittsim").warning(f"Failed to load {candidate}: {e}")
    return {}


def main():
    config = load_config()
    setup_logging(debug=bool(config.get("log", {}).get("debug", False)))
    sys.exit(dispatch(sys.argv[1:], config))


if __name__ == "__main__":
    main()
