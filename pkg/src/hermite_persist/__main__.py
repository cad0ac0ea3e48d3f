"""Module entry point.

Allows running the toolkit with: python -m hermite_persist

Usage:
    python -m hermite_persist list
    python -m hermite_persist exponent --m 2 --H 0.7 --replicas 20000
    python -m hermite_persist decorrelate --times 0,0.5,1 --levels 0.5,0.5
"""

from hermite_persist.cli import main

if __name__ == "__main__":
    main()
