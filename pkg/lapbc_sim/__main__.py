"""`python -m lapbc_sim` entrypoint."""

from .cli import main


if __name__ == "__main__":
    main()
