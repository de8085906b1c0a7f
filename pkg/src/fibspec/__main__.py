import sys

from fibspec.cli import main

sys.exit(main())
