#!/usr/bin/env python3
"""
Command-line launcher
Puts backend/src on the import path and runs the cutlift commands
"""

import sys
from pathlib import Path

src_dir = Path(__file__).resolve().parent / "backend" / "src"
if not src_dir.exists():
    sys.stderr.write(f"Error: backend/src directory not found under {src_dir.parent.parent}\n")
    sys.exit(2)
sys.path.insert(0, str(src_dir))

from cli import main  # noqa: E402

if __name__ == "__main__":
    main()
