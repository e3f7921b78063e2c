#!/usr/bin/env python3
"""Regenerate the data behind every figure (or one of them) into OUT_DIR.

Usage:
    python scripts/run_figures.py [--out OUT_DIR] [--only figN]

Thin wrapper over `otoclab reproduce-all`; exits nonzero when a derived
quantity misses its target.
"""
import sys

from otoclab.cli import main

if __name__ == "__main__":
    sys.exit(main(["reproduce-all"] + sys.argv[1:]))
