import sys

from aplab.cli import main

sys.exit(main())
