import sys

from evotypes.cli import main

sys.exit(main())
