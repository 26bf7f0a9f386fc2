"""
Errors and shared helpers
"""
