"""
Utility modules for parrep-sensitivity.

This package contains file handling and network validation helpers.
"""

from .file_handler import FileHandler
from .validation import NetworkValidator

__all__ = ["FileHandler", "NetworkValidator"]
