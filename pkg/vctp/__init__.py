"""
VCTP: распространение доверия для верифицируемых креденшалов.
"""

__version__ = "1.0.0"
