"""python -m backend.nb_trials"""

import sys

from .cli.main import main

sys.exit(main())
