import sys

from boundary_sdf.cli import main

sys.exit(main())
