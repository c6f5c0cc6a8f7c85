#!/usr/bin/env python3
"""Launcher for the rgc-dim command line: ``python rgc_dim.py <subcommand> ...``."""
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from app.cli import main

if __name__ == "__main__":
    main()
