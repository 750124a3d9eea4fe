import sys

from rigdeg.cli import main

sys.exit(main())
