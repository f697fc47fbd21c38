# Status lines go to stderr; stdout is reserved for data.
import sys


def log(message: str = "") -> None:
    print(message, file=sys.stderr, flush=True)


def out(message: str = "") -> None:
    print(message, file=sys.stdout, flush=True)
