import sys

from fuzzyopt.main import main

sys.exit(main())
