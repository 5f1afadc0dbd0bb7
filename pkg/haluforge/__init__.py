"""
HaluForge - hallucination-driven vulnerability detection pipeline for Rust
"""

__version__ = "0.1.0"
