# Sphinx configuration for the levysmooth documentation.
#
# The module and script pages include ``generated/*.rst`` stubs, produced with
#   sphinx-apidoc -e -M -o docs/source/generated levysmooth

import os
import sys

sys.path.insert(0, os.path.abspath("../.."))

project = "levysmooth"
copyright = "2026, CRP"
author = "CRP"
release = "0.1.0"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
    "sphinx.ext.mathjax",
]

autodoc_default_options = {
    "members": True,
    "member-order": "bysource",
    "show-inheritance": True,
}
autodoc_typehints = "description"

# Docstrings are Google style throughout.
napoleon_google_docstring = True
napoleon_numpy_docstring = False
napoleon_include_init_with_doc = False
napoleon_include_private_with_doc = False
napoleon_use_param = True
napoleon_use_rtype = True
napoleon_attr_annotations = True

templates_path = ["_templates"]
exclude_patterns = ["generated/levysmooth.rst", "generated/modules.rst"]

html_theme = "sphinx_rtd_theme"
html_static_path = ["_static"]
