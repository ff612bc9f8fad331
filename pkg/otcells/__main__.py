import sys

from otcells.cmdline import otcells_main

# Running otcells as a module (e.g. `python -m otcells`)
# is equivalent to running the main `otcells` command.

sys.exit(otcells_main())
