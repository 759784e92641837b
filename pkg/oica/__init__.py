"""
Overcomplete ICA with degeneracy control.

Useful modules are oica.costs, oica.optimizer and oica.gabor; the command
line lives in oica.util.experiments and oica.__main__.
"""

__version__ = "0.1.0"
