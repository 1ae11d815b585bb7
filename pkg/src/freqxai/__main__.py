import sys

from freqxai.cli import main

sys.exit(main())
