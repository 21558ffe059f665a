import sys

from ruleflow.cli import main

sys.exit(main())
