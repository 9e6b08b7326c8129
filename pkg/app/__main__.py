import sys

from app.pipeline.cli import main

sys.exit(main())
