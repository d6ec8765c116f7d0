import sys

from convreg.cli import main

sys.exit(main())
