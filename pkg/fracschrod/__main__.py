import sys

from fracschrod import main

sys.exit(main())
