#!/usr/bin/env python3
"""Regenerate the shipped device-input scripts in scenes/scripts/.

The generators are deterministic, so re-running this always reproduces the
checked-in files byte for byte.
"""

from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from fracsim.sceneio import load_scene
from fracsim.scriptgen import write_shipped_scripts


def main() -> int:
    root = os.path.join(os.path.dirname(__file__), "..")
    scene = load_scene(os.path.join(root, "scenes", "femur_default.yaml"))
    written = write_shipped_scripts(scene, os.path.join(root, "scenes", "scripts"))
    for path in written:
        print(f"wrote {os.path.relpath(path, root)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
