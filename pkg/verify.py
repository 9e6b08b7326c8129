"""
Command-line entry point.

    python verify.py verify --schema S --program P --spec F [--domain codes=3] [--json]
    python verify.py verify-corpus corpus/newsletter
"""

import sys

from app.pipeline.cli import main

if __name__ == '__main__':
    sys.exit(main())
