# This file is execfile()d with the current directory set to its containing dir.

import os
import re
import sys
import time

sys.path.insert(0, os.path.abspath(".."))

extensions = [
    "sphinx.ext.napoleon",
    "sphinx.ext.intersphinx",
    "sphinx.ext.autodoc",
    "sphinx.ext.viewcode",
]

from get_version import __version__ as otcells_version

# Read the Docs might dirty its checkout, so strip the dirty flag.
otcells_version = re.sub(r"[+.]dirty\Z", "", otcells_version)

templates_path = ["_templates"]
source_suffix = ".rst"

master_doc = "index"

# General information about the project.
project = "otcells"
copyright = "%s the authors" % time.strftime("%Y")

# The short X.Y version.
version = ".".join(otcells_version.split(".")[:-1])
# The full version, including alpha/beta/rc tags.
release = otcells_version

exclude_patterns = ["_build"]
add_module_names = True

pygments_style = "sphinx"

import sphinx_rtd_theme

html_theme = "sphinx_rtd_theme"
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]

html_use_smartypants = False
html_show_sphinx = False

highlight_language = "ini"

intersphinx_mapping = dict(
    py=("https://docs.python.org/3/", None),
    numpy=("https://numpy.org/doc/stable/", None),
    scipy=("https://docs.scipy.org/doc/scipy/", None),
)
