import sys

from ._reachkit import main

sys.exit(main(sys.argv[1:]))
