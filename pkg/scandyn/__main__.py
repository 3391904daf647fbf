import sys

from scandyn.bench_cli import main

sys.exit(main())
