from hitpredict.cli import main
import sys
sys.exit(main())
