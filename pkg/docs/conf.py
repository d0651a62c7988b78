# -*- coding: utf-8 -*-
#
# Sphinx configuration for the mlmcdrop documentation.

import os
import sys

sys.path.insert(0, os.path.abspath(".."))

version = {}
with open(os.path.abspath("../mlmcdrop/version.py"), "r") as fh:
    exec(fh.read(), version)

project = "mlmcdrop"
copyright = "2026, The mlmcdrop developers"
author = "The mlmcdrop developers"
release = version["__version__"]
version = ".".join(release.split(".")[:2])

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
    "sphinx.ext.napoleon",
    "sphinx.ext.intersphinx",
]

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable", None),
    "pandas": ("https://pandas.pydata.org/docs", None),
}

source_suffix = ".txt"
master_doc = "index"
exclude_patterns = ["_build"]

html_theme = "sphinx_rtd_theme"
