import sys

from m0n.cli import main

sys.exit(main())
