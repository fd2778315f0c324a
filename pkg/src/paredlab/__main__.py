from __future__ import annotations

import sys

from paredlab.cli import main

sys.exit(main())
