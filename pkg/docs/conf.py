# Sphinx configuration for the RNIFS toolkit.
# https://www.sphinx-doc.org/en/master/usage/configuration.html

####################################################################
import sys
import os

sys.path.append(os.path.abspath('..'))
####################################################################
project = 'RNIFS toolkit'
copyright = '2024, BartoszKa'
author = 'BartoszKa'
release = '1.0.0'

####################################################################
extensions = ['sphinx.ext.autodoc', 'sphinx.ext.mathjax']
autodoc_member_order = 'bysource'
autodoc_typehints = 'description'
# scipy and Pillow are heavy; the API pages only need signatures
autodoc_mock_imports = ['scipy', 'PIL']
####################################################################

templates_path = ['_templates']
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store', 'maps.md']

####################################################################
html_theme = 'nature'
html_static_path = ['_static']
html_title = 'RNIFS toolkit'
####################################################################
