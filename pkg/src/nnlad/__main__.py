import sys

from nnlad.cli import main

sys.exit(main())
