import sys

from etk.cli import main

sys.exit(main())
