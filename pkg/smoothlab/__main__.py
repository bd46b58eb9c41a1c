"""python -m smoothlab"""
import sys

from smoothlab.cli.main import main

sys.exit(main())
