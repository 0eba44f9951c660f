import sys

from medialkit.main import run

sys.exit(run())
