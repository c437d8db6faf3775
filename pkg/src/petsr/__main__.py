"""Module entry point for CLI execution.

Usage:
    PYTHONPATH=src python -m petsr phantom --config run.cfg
    PYTHONPATH=src python -m petsr ablate --config run.cfg --setting standard
"""

from .cli import main

if __name__ == "__main__":
    main()
