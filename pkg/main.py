#!/usr/bin/env python3
"""Compatibilidad con el lanzador histórico: equivale a ``python -m umia_lab``."""

from __future__ import annotations

import sys

from umia_lab.harness.cli import main


if __name__ == "__main__":
    sys.exit(main())
