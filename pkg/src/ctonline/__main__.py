import sys

from ctonline.cli import main

sys.exit(main())
