"""
Data Aggregator + Dashboard Backend Application
"""

__version__ = "0.1.0"
