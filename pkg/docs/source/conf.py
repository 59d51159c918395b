# Sphinx configuration of the rispursuit API docs.
import os
import sys

sys.path.insert(0, os.path.abspath('../..'))

from rispursuit import __version__  # noqa: E402

project = 'rispursuit'
copyright = '2026, rispursuit developers'
author = 'rispursuit developers'
release = __version__

extensions = [
  'sphinx_rtd_theme',
  'sphinx.ext.autodoc',
]
autodoc_member_order = 'bysource'

templates_path = ['_templates']
exclude_patterns = []

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
