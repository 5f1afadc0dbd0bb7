"""
Core services shared by every pipeline stage
"""
