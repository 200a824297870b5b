"""
Command-line front end.

Subcommands ``derive``, ``verify-paper``, ``expand-super`` and ``simulate``
drive the ``skdv_core`` library.
"""

__version__ = "1.0.0"
