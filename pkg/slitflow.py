#!/usr/bin/env python3
"""
slitflow - batch driver for vortex flows outside a vanishing slit.

Usage: slitflow.py <mode> --config <path> [--out <dir>] [--check <name>] [--seed <n>]
"""

import sys

from cli.commands import main

if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\nInterrupted by user")
        sys.exit(2)
