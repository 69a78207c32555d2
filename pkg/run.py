import sys

from convexity_testing.harness import main as harness_main


def main():
    # Thin launcher so the CLI also works from a source checkout
    sys.exit(harness_main())


if __name__ == '__main__':
    main()
