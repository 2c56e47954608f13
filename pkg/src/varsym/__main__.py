import sys

from varsym.cli import main

sys.exit(main())
