# -*- coding: utf-8 -*-
#
# Sphinx configuration of the logical-layout documentation; the API pages are generated by sphinx-apidoc.

import os
import shutil
import sys

__location__ = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(__location__, "../src"))

# -- API pages ----------------------------------------------------------------

from sphinx.ext import apidoc

output_dir = os.path.join(__location__, "api")
module_dir = os.path.join(__location__, "../src/logical_layout")
shutil.rmtree(output_dir, ignore_errors=True)
apidoc.main(["-f", "-o", output_dir, module_dir])

# -- General configuration ----------------------------------------------------

extensions = ["sphinx.ext.autodoc", "sphinx.ext.intersphinx", "sphinx.ext.viewcode", "sphinx.ext.napoleon"]

source_suffix = ".rst"
master_doc = "index"
exclude_patterns = ["_build"]
pygments_style = "sphinx"

project = "logical-layout"
copyright = "2026, logical-layout contributors"

try:
    from logical_layout import __version__ as version
except ImportError:
    version = ""
release = version

# -- HTML output --------------------------------------------------------------

html_theme = "alabaster"
htmlhelp_basename = "logical_layout-doc"

# -- External mapping ---------------------------------------------------------

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable", None),
    "pandas": ("https://pandas.pydata.org/docs", None),
    "sklearn": ("https://scikit-learn.org/stable", None),
}
