import sys

from optomacro.cli import main

sys.exit(main())
