import sys

from rispursuit.cli import main

sys.exit(main())
