import sys

from husl.harness.cli import main

sys.exit(main())
