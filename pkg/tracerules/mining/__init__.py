"""
Offline stage: field selection, pattern mining and rule classification.
"""

from . import fields, classify, patterns  # noqa
