import sys

from path_srl.cli import main

sys.exit(main())
