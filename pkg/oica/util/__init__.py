"""

This package implements the oica command line experiments and their
tolerance reports

"""
