# main_sim.py
import os
import sys

from dotenv import load_dotenv

PROJECT_ROOT = os.path.dirname(os.path.abspath(__file__))
load_dotenv(os.path.join(PROJECT_ROOT, ".env"))

from interfaces.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
