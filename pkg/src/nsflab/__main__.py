import sys

from nsflab.cli import main

sys.exit(main())
