import sys

from relaxo.cli import main

sys.exit(main())
