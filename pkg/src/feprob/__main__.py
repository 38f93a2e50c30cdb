from feprob.cli import main
import sys

sys.exit(main())
