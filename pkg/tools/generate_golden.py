#!/usr/bin/env python3
"""Regenerate the committed golden outputs for the reference pipeline.

Run from the repository root after an intentional output change:

    python3 tools/generate_golden.py

then review the diff under tests/golden/ before committing.
"""

import os
import shutil
import sys
import tempfile

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))

from pipeline import GOLDEN_FILES, run_reference_pipeline  # noqa: E402


def main() -> None:
    golden_dir = os.path.join(os.path.dirname(__file__), "..", "tests", "golden")
    os.makedirs(golden_dir, exist_ok=True)
    with tempfile.TemporaryDirectory() as workdir:
        out_dir = run_reference_pipeline(workdir)
        for name in GOLDEN_FILES:
            shutil.copyfile(os.path.join(out_dir, name),
                            os.path.join(golden_dir, name))
    print(f"golden files written to {os.path.abspath(golden_dir)}")


if __name__ == "__main__":
    main()
