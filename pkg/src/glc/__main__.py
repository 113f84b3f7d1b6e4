import sys

from glc.cli import main

sys.exit(main())
