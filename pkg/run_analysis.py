#!/usr/bin/env python3
"""
Continuum stability toolkit - command-line entry point

    python run_analysis.py <command> [options]

Run `python run_analysis.py --help` for the list of commands.
"""

import sys

from continuum_stability.cli import main

if __name__ == "__main__":
    sys.exit(main())
