"""Where the demos write their figures (``CONFED_DEMO_OUT``, default ./demo_output)."""

import os
from pathlib import Path


def out_dir() -> Path:
    path = Path(os.environ.get("CONFED_DEMO_OUT", "demo_output"))
    path.mkdir(parents=True, exist_ok=True)
    return path
