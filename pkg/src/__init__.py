"""
NSV - smooth neural state variables and learned dynamics
"""

__version__ = "1.0.0"
