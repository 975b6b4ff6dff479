#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
    Setup file for logical_layout.

    All metadata lives in setup.cfg; this file only exists so that
    `pip install -e .` and `python setup.py test` keep working.
"""

from setuptools import setup


def setup_package():
    setup()


if __name__ == "__main__":
    setup_package()
