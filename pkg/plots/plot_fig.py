#!/usr/bin/env python3
"""Render an experiment CSV to an image; see isacplots.cli for the flags."""

import sys

from isacplots.cli import main

if __name__ == "__main__":
    sys.exit(main())
