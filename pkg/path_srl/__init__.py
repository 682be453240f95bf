"""
Path-embedding semantic role labeler for CoNLL-2009 data.
"""

__version__ = "1.0.0"
