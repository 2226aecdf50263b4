#!/usr/bin/env python3
"""
nulllda - Main Entry Point
"""

import sys
from pathlib import Path

# Add project root to Python path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from src.interfaces.cli import cli  # noqa: E402


def main():
    """Main entry point for the nulllda command line."""
    cli(prog_name="nulllda")


if __name__ == "__main__":
    main()
