import sys

from resilnet.cli import main

sys.exit(main())
