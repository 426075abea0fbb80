#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Sphinx configuration of the PyVFU documentation

The API pages in 'dev_doc/' are generated from the 'pyvfu' package with
'sphinx-apidoc' on every build, the CLI help page from 'pyvfu -h'.
"""

import os
import subprocess
import sys

DOC_DIR = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(DOC_DIR, '..', '..', 'src', 'lib'))

from pyvfu.__version__ import __version__

project = 'PyVFU'
author = 'The PyVFU authors'
copyright = '2024, the PyVFU authors'
version = release = __version__

for script in ('dev_doc/gen_auto_doc.sh', '_gen_help_page.sh'):
    subprocess.run(['bash', os.path.join(DOC_DIR, script)], check=False)

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.autosummary',
    'sphinx.ext.mathjax',
]

autodoc_default_options = {
    'members': None,
    'undoc-members': None,
    'show-inheritance': None,
    'member-order': 'bysource',
}
autosummary_generate = True

master_doc = 'index'
source_suffix = ['.rst']
templates_path = ['_templates']
exclude_patterns = ['_build']
numfig = True

rst_prolog = """
.. |name| replace:: PyVFU
.. |name_bold| replace:: **PyVFU**
.. |name_cli| replace:: ``pyvfu``
.. |vfl| replace:: vertical federated learning
.. |mia| replace:: membership inference attack
.. |license| replace:: Apache-2.0
.. _pip: https://pip.pypa.io/en/stable/
"""

html_theme = 'sphinx_rtd_theme'
html_theme_options = {'navigation_depth': 3}
htmlhelp_basename = 'pyvfu_doc'

latex_documents = [
    (master_doc, 'pyvfu.tex', 'PyVFU Documentation', author, 'manual'),
]
