import sys

from pprkit.cli import main

sys.exit(main())
